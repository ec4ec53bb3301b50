//! 2D SVG rendering: domain boundary, rasterized configuration-space
//! obstacles, region polygons, inscribed ellipses, and seed markers.
//!
//! Output is deterministic: no timestamps, and every coordinate goes
//! through the same 9-significant-digit formatter.

use nalgebra::DVector;

use cfree_core::collision::{check_batch, CollisionWorld};
use cfree_core::geometry::{Ellipsoid, HPolytope};

use crate::CmdError;

/// Rounds to 9 significant digits and prints the shortest representation.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(8 - magnitude);
    let rounded = (x * scale).round() / scale;
    format!("{rounded}")
}

/// Vertices of a bounded 2D H-polytope: pairwise face intersections,
/// membership filtering, deduplication, and an angular sort around the
/// centroid.
pub fn polytope_vertices_2d(p: &HPolytope<f64>) -> Result<Vec<[f64; 2]>, CmdError> {
    if p.dim() != 2 {
        return Err(CmdError::input("vertex enumeration requires dimension 2"));
    }
    let a = p.a();
    let b = p.b();
    let scale = b.amax().max(1.0);
    let tol = 1e-7 * scale;
    let mut verts: Vec<[f64; 2]> = Vec::new();
    for i in 0..p.num_faces() {
        for j in (i + 1)..p.num_faces() {
            let det = a[(i, 0)] * a[(j, 1)] - a[(i, 1)] * a[(j, 0)];
            let norm_i = (a[(i, 0)].powi(2) + a[(i, 1)].powi(2)).sqrt();
            let norm_j = (a[(j, 0)].powi(2) + a[(j, 1)].powi(2)).sqrt();
            if det.abs() <= 1e-12 * norm_i * norm_j {
                continue;
            }
            let x = (b[i] * a[(j, 1)] - a[(i, 1)] * b[j]) / det;
            let y = (a[(i, 0)] * b[j] - b[i] * a[(j, 0)]) / det;
            // Keep only intersections on the polytope boundary.
            let q = DVector::from_row_slice(&[x, y]);
            let mut inside = true;
            for r in 0..p.num_faces() {
                if p.face_dot(r, &q) > b[r] + tol {
                    inside = false;
                    break;
                }
            }
            if !inside {
                continue;
            }
            if !verts
                .iter()
                .any(|v| (v[0] - x).abs() <= 1e-9 * scale && (v[1] - y).abs() <= 1e-9 * scale)
            {
                verts.push([x, y]);
            }
        }
    }
    if verts.len() < 3 {
        return Err(CmdError::input(
            "region polytope is degenerate (fewer than 3 vertices)",
        ));
    }
    let cx = verts.iter().map(|v| v[0]).sum::<f64>() / verts.len() as f64;
    let cy = verts.iter().map(|v| v[1]).sum::<f64>() / verts.len() as f64;
    verts.sort_by(|p1, p2| {
        let a1 = (p1[1] - cy).atan2(p1[0] - cx);
        let a2 = (p2[1] - cy).atan2(p2[0] - cx);
        a1.partial_cmp(&a2).expect("finite angles")
    });
    Ok(verts)
}

/// Axis-aligned bounding box of a bounded 2D polytope.
pub fn bounding_box_2d(p: &HPolytope<f64>) -> Result<([f64; 2], [f64; 2]), CmdError> {
    let verts = polytope_vertices_2d(p)?;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for v in &verts {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    Ok((lo, hi))
}

/// Collision raster over `[lo, hi]`: `resolution x resolution` cells,
/// evaluated at cell centers, row-major with row 0 at `lo[1]`.
pub fn collision_raster<W: CollisionWorld<f64> + ?Sized>(
    world: &W,
    lo: [f64; 2],
    hi: [f64; 2],
    resolution: usize,
) -> Vec<bool> {
    let mut centers = Vec::with_capacity(resolution * resolution);
    for row in 0..resolution {
        let y = lo[1] + (hi[1] - lo[1]) * (row as f64 + 0.5) / resolution as f64;
        for col in 0..resolution {
            let x = lo[0] + (hi[0] - lo[0]) * (col as f64 + 0.5) / resolution as f64;
            centers.push(DVector::from_row_slice(&[x, y]));
        }
    }
    check_batch(world, &centers)
}

struct Mapper {
    lo: [f64; 2],
    scale: f64,
    height: f64,
    margin: f64,
}

impl Mapper {
    fn x(&self, x: f64) -> f64 {
        self.margin + (x - self.lo[0]) * self.scale
    }

    // SVG y grows downward.
    fn y(&self, y: f64) -> f64 {
        self.margin + self.height - (y - self.lo[1]) * self.scale
    }
}

const PALETTE: [&str; 6] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Renders the scene and regions into an SVG document.
///
/// `regions` pairs each polytope with its inscribed ellipsoid and seed.
pub fn render_svg<W: CollisionWorld<f64> + ?Sized>(
    world: &W,
    domain: &HPolytope<f64>,
    regions: &[(HPolytope<f64>, Ellipsoid<f64>, DVector<f64>)],
    resolution: usize,
) -> Result<String, CmdError> {
    let (lo, hi) = bounding_box_2d(domain)?;
    let span_x = hi[0] - lo[0];
    let span_y = hi[1] - lo[1];
    let width_px = 800.0;
    let margin = 20.0;
    let scale = (width_px - 2.0 * margin) / span_x;
    let height_px = span_y * scale + 2.0 * margin;
    let map = Mapper {
        lo,
        scale,
        height: span_y * scale,
        margin,
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\" width=\"{}\" height=\"{}\">\n",
        fmt_sig(width_px),
        fmt_sig(height_px),
        fmt_sig(width_px),
        fmt_sig(height_px)
    ));
    svg.push_str("<style>\n.domain { fill: none; stroke: #222222; stroke-width: 1.5; }\n.obstacle { fill: #606060; stroke: none; }\n");
    for (idx, _) in regions.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        svg.push_str(&format!(
            ".region-{idx} {{ fill: none; stroke: {color}; stroke-width: 2; }}\n.ellipse-{idx} {{ fill: none; stroke: {color}; stroke-width: 1; stroke-dasharray: 4 3; }}\n.seed-{idx} {{ fill: {color}; }}\n"
        ));
    }
    svg.push_str("</style>\n");

    // Obstacle raster: merge consecutive colliding cells per row into one
    // rectangle to keep the file small.
    let flags = collision_raster(world, lo, hi, resolution);
    let cell_w = span_x / resolution as f64;
    let cell_h = span_y / resolution as f64;
    svg.push_str("<g class=\"obstacles\">\n");
    for row in 0..resolution {
        let mut col = 0;
        while col < resolution {
            if flags[row * resolution + col] {
                let run_start = col;
                while col < resolution && flags[row * resolution + col] {
                    col += 1;
                }
                let x0 = lo[0] + run_start as f64 * cell_w;
                let y0 = lo[1] + row as f64 * cell_h;
                let y1 = y0 + cell_h;
                svg.push_str(&format!(
                    "<rect class=\"obstacle\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>\n",
                    fmt_sig(map.x(x0)),
                    fmt_sig(map.y(y1)),
                    fmt_sig((col - run_start) as f64 * cell_w * scale),
                    fmt_sig(cell_h * scale)
                ));
            } else {
                col += 1;
            }
        }
    }
    svg.push_str("</g>\n");

    let domain_verts = polytope_vertices_2d(domain)?;
    svg.push_str(&polygon_element("domain", &domain_verts, &map));

    for (idx, (poly, ellipsoid, seed)) in regions.iter().enumerate() {
        let verts = polytope_vertices_2d(poly)?;
        svg.push_str(&polygon_element(&format!("region-{idx}"), &verts, &map));

        // Ellipse axes from the closed-form 2x2 symmetric eigensystem of E;
        // semi-axes are 1/sqrt(eigenvalue).
        let e = ellipsoid.shape();
        let (e11, e12, e22) = (e[(0, 0)], e[(0, 1)], e[(1, 1)]);
        let half_trace = 0.5 * (e11 + e22);
        let disc = (0.25 * (e11 - e22).powi(2) + e12 * e12).sqrt();
        let l1 = half_trace + disc;
        let l2 = half_trace - disc;
        // The eigenvector of the larger eigenvalue l1 points along `angle`;
        // its semi-axis 1/sqrt(l1) becomes rx after the rotation.
        let angle = 0.5 * (2.0 * e12).atan2(e11 - e22);
        let rx = 1.0 / l1.sqrt();
        let ry = 1.0 / l2.sqrt();
        let c = ellipsoid.center();
        svg.push_str(&format!(
            "<ellipse class=\"ellipse-{idx}\" cx=\"0\" cy=\"0\" rx=\"{}\" ry=\"{}\" transform=\"translate({} {}) rotate({})\"/>\n",
            fmt_sig(rx * scale),
            fmt_sig(ry * scale),
            fmt_sig(map.x(c[0])),
            fmt_sig(map.y(c[1])),
            fmt_sig(-angle.to_degrees())
        ));
        svg.push_str(&format!(
            "<circle class=\"seed-{idx}\" cx=\"{}\" cy=\"{}\" r=\"4\"/>\n",
            fmt_sig(map.x(seed[0])),
            fmt_sig(map.y(seed[1]))
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn polygon_element(class: &str, verts: &[[f64; 2]], map: &Mapper) -> String {
    let points: Vec<String> = verts
        .iter()
        .map(|v| format!("{},{}", fmt_sig(map.x(v[0])), fmt_sig(map.y(v[1]))))
        .collect();
    format!(
        "<polygon class=\"{class}\" points=\"{}\"/>\n",
        points.join(" ")
    )
}
