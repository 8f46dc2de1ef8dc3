//! Node topography: O/Y/X labels per junction, the network's ternary
//! coordinates, and the triangular chart that visualizes them.

use crate::graphx::CrackGraph;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("no classifiable nodes")]
    NoClassifiableNodes,
    #[error("invalid ternary coordinates: ({0}, {1}, {2})")]
    BadCoords(f64, f64, f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Junction class by valence: endpoints (degree 1), three-way crossings
/// (degree 3), and four-way or higher (folded into X).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum NodeType {
    O,
    Y,
    X,
}

impl NodeType {
    pub fn from_degree(degree: usize) -> Option<Self> {
        match degree {
            1 => Some(NodeType::O),
            3 => Some(NodeType::Y),
            d if d >= 4 => Some(NodeType::X),
            _ => None, // degree 0 and the artificial degree-2 loop anchors
        }
    }
}

/// Fractions of O/Y/X nodes; they sum to one.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TernaryCoords {
    pub n_o: f64,
    pub n_y: f64,
    pub n_x: f64,
}

/// Labels every classifiable node. Degree-2 nodes (artificial loop anchors)
/// and degree-0 leftovers carry no label and are absent from the map.
pub fn classify_nodes(g: &CrackGraph) -> BTreeMap<usize, NodeType> {
    g.nodes
        .iter()
        .filter_map(|n| NodeType::from_degree(n.degree).map(|t| (n.id, t)))
        .collect()
}

/// Ratio of O, Y, and X nodes among the classified ones.
pub fn ternary_coords(types: &BTreeMap<usize, NodeType>) -> Result<TernaryCoords, TopologyError> {
    if types.is_empty() {
        return Err(TopologyError::NoClassifiableNodes);
    }
    let total = types.len() as f64;
    let count = |t: NodeType| types.values().filter(|v| **v == t).count() as f64 / total;
    Ok(TernaryCoords { n_o: count(NodeType::O), n_y: count(NodeType::Y), n_x: count(NodeType::X) })
}

/// Chart geometry: equilateral triangle with O at bottom-left, Y at
/// bottom-right, X on top, in SVG pixel coordinates.
pub const CHART_SIZE: f64 = 640.0;
const MARGIN: f64 = 60.0;

/// Barycentric position of a ternary point inside the chart triangle.
pub fn chart_position(c: &TernaryCoords) -> (f64, f64) {
    let side = CHART_SIZE - 2.0 * MARGIN;
    let h = side * 3f64.sqrt() / 2.0;
    let o = (MARGIN, MARGIN + h); // bottom-left
    let y = (MARGIN + side, MARGIN + h); // bottom-right
    let x = (MARGIN + side / 2.0, MARGIN); // top
    (
        c.n_o * o.0 + c.n_y * y.0 + c.n_x * x.0,
        c.n_o * o.1 + c.n_y * y.1 + c.n_x * x.1,
    )
}

/// Renders the triangular topography chart as an SVG document. With 20 or
/// more points a barycentric 2D histogram is shaded underneath (darker =
/// denser), mirroring how dense point clouds are usually displayed.
pub fn render_ternary_chart(
    points: &[(TernaryCoords, String)],
    out: &Path,
) -> Result<(), TopologyError> {
    for (c, _) in points {
        let sum = c.n_o + c.n_y + c.n_x;
        let ok = (sum - 1.0).abs() <= 1e-9 && c.n_o >= 0.0 && c.n_y >= 0.0 && c.n_x >= 0.0;
        if !ok {
            return Err(TopologyError::BadCoords(c.n_o, c.n_y, c.n_x));
        }
    }
    let svg = ternary_chart_svg(points);
    let mut file = std::fs::File::create(out)?;
    file.write_all(svg.as_bytes())?;
    Ok(())
}

pub fn ternary_chart_svg(points: &[(TernaryCoords, String)]) -> String {
    let side = CHART_SIZE - 2.0 * MARGIN;
    let h = side * 3f64.sqrt() / 2.0;
    let (ov, yv, xv) = (
        (MARGIN, MARGIN + h),
        (MARGIN + side, MARGIN + h),
        (MARGIN + side / 2.0, MARGIN),
    );
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
        CHART_SIZE
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // density shading: histogram over a barycentric grid, 40 bins per axis
    if points.len() >= 20 {
        const BINS: usize = 40;
        let mut hist = vec![0u32; BINS * BINS];
        let mut max = 0u32;
        for (c, _) in points {
            let i = ((c.n_o * BINS as f64) as usize).min(BINS - 1);
            let j = ((c.n_y * BINS as f64) as usize).min(BINS - 1);
            hist[i * BINS + j] += 1;
            max = max.max(hist[i * BINS + j]);
        }
        s.push_str("<g shape-rendering=\"crispEdges\" data-layer=\"density\">\n");
        for i in 0..BINS {
            for j in 0..BINS {
                let n = hist[i * BINS + j];
                if n == 0 {
                    continue;
                }
                // cell corners in ternary space, clipped triangle cells drawn
                // as their centroid-anchored quads
                let t = f64::from(n) / f64::from(max);
                let gray = (235.0 - 185.0 * t) as u8;
                let cell = |no: f64, ny: f64| {
                    let nx = (1.0 - no - ny).max(0.0);
                    let c = TernaryCoords { n_o: no, n_y: ny, n_x: nx };
                    chart_position(&c)
                };
                let b = 1.0 / BINS as f64;
                let (no0, ny0) = (i as f64 * b, j as f64 * b);
                if no0 + ny0 > 1.0 {
                    continue;
                }
                let p = [
                    cell(no0, ny0),
                    cell(no0 + b, ny0),
                    cell(no0 + b, ny0 + b),
                    cell(no0, ny0 + b),
                ];
                let coords: Vec<String> =
                    p.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                s.push_str(&format!(
                    "<polygon points=\"{}\" fill=\"rgb({gray},{gray},{gray})\"/>\n",
                    coords.join(" ")
                ));
            }
        }
        s.push_str("</g>\n");
    }

    // triangle frame and vertex labels
    s.push_str(&format!(
        "<polygon points=\"{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
        ov.0, ov.1, yv.0, yv.1, xv.0, xv.1
    ));
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"22\" text-anchor=\"middle\">O</text>\n",
        ov.0 - 18.0, ov.1 + 8.0
    ));
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"22\" text-anchor=\"middle\">Y</text>\n",
        yv.0 + 18.0, yv.1 + 8.0
    ));
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"22\" text-anchor=\"middle\">X</text>\n",
        xv.0, xv.1 - 10.0
    ));

    for (c, label) in points {
        let (px, py) = chart_position(c);
        s.push_str(&format!(
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"4\" fill=\"crimson\" fill-opacity=\"0.8\"><title>{}</title></circle>\n",
            xml_escape(label)
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One CSV line per image: `image,n_o,n_y,n_x`.
pub fn ternary_csv(rows: &[(String, TernaryCoords)]) -> String {
    let mut out = String::from("image,n_o,n_y,n_x\n");
    for (name, c) in rows {
        out.push_str(&format!("{name},{},{},{}\n", c.n_o, c.n_y, c.n_x));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphx::{Edge, Node};

    fn star(arms: usize) -> CrackGraph {
        let mut nodes = vec![Node { id: 0, x: 50, y: 50, degree: 0 }];
        let mut edges = Vec::new();
        for a in 0..arms {
            nodes.push(Node { id: a + 1, x: 10 + a as u32 * 7, y: 10, degree: 0 });
            edges.push(Edge { id: a, u: Some(0), v: Some(a + 1), chain: vec![] });
        }
        let mut g = CrackGraph { nodes, edges, width: 100, height: 100 };
        g.recompute_degrees();
        g
    }

    #[test]
    fn plus_sign_is_x_with_four_o() {
        let g = star(4);
        let types = classify_nodes(&g);
        assert_eq!(types[&0], NodeType::X);
        for id in 1..=4 {
            assert_eq!(types[&id], NodeType::O);
        }
    }

    #[test]
    fn tee_junction_is_y() {
        let g = star(3);
        let types = classify_nodes(&g);
        assert_eq!(types[&0], NodeType::Y);
    }

    #[test]
    fn six_way_star_folds_into_x() {
        let g = star(6);
        assert_eq!(classify_nodes(&g)[&0], NodeType::X);
    }

    #[test]
    fn degree_two_nodes_are_not_classified() {
        let mut g = star(2);
        g.recompute_degrees();
        let types = classify_nodes(&g);
        assert!(!types.contains_key(&0));
        assert_eq!(types.len(), 2);
    }

    #[test]
    fn ternary_coords_fractions() {
        let mut types = BTreeMap::new();
        types.insert(0, NodeType::O);
        types.insert(1, NodeType::O);
        types.insert(2, NodeType::Y);
        let c = ternary_coords(&types).unwrap();
        assert!((c.n_o - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.n_y - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.n_x, 0.0);
        assert!((c.n_o + c.n_y + c.n_x - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn empty_map_is_an_error() {
        let types = BTreeMap::new();
        assert!(matches!(ternary_coords(&types), Err(TopologyError::NoClassifiableNodes)));
    }

    #[test]
    fn all_x_maps_to_top_vertex_region() {
        let c = TernaryCoords { n_o: 0.0, n_y: 0.0, n_x: 1.0 };
        let (px, py) = chart_position(&c);
        assert!((px - CHART_SIZE / 2.0).abs() < 1e-9);
        assert!((py - 60.0).abs() < 1e-9);
    }

    #[test]
    fn vertex_cases_are_exact() {
        let side = CHART_SIZE - 120.0;
        let h = side * 3f64.sqrt() / 2.0;
        let o = chart_position(&TernaryCoords { n_o: 1.0, n_y: 0.0, n_x: 0.0 });
        assert_eq!(o, (60.0, 60.0 + h));
        let y = chart_position(&TernaryCoords { n_o: 0.0, n_y: 1.0, n_x: 0.0 });
        assert_eq!(y, (60.0 + side, 60.0 + h));
    }

    #[test]
    fn centroid_point_lands_in_triangle_center() {
        let c = TernaryCoords { n_o: 1.0 / 3.0, n_y: 1.0 / 3.0, n_x: 1.0 / 3.0 };
        let (px, py) = chart_position(&c);
        let side = CHART_SIZE - 120.0;
        let h = side * 3f64.sqrt() / 2.0;
        let expect_x = (60.0 + (60.0 + side) + (60.0 + side / 2.0)) / 3.0;
        let expect_y = ((60.0 + h) * 2.0 + 60.0) / 3.0;
        assert!((px - expect_x).abs() < 1e-9);
        assert!((py - expect_y).abs() < 1e-9);
    }

    #[test]
    fn barycentric_placement_is_affine() {
        // position(a*p + b*q) = a*position(p) + b*position(q) for a+b=1
        let p = TernaryCoords { n_o: 0.6, n_y: 0.3, n_x: 0.1 };
        let q = TernaryCoords { n_o: 0.1, n_y: 0.2, n_x: 0.7 };
        let a = 0.37;
        let mix = TernaryCoords {
            n_o: a * p.n_o + (1.0 - a) * q.n_o,
            n_y: a * p.n_y + (1.0 - a) * q.n_y,
            n_x: a * p.n_x + (1.0 - a) * q.n_x,
        };
        let (px, py) = chart_position(&p);
        let (qx, qy) = chart_position(&q);
        let (mx, my) = chart_position(&mix);
        assert!((mx - (a * px + (1.0 - a) * qx)).abs() < 1e-9);
        assert!((my - (a * py + (1.0 - a) * qy)).abs() < 1e-9);
    }

    #[test]
    fn real_network_mean_sits_low_between_o_and_y() {
        // typical real-painting distribution: X nodes are rare, so the mean
        // point hangs just above the O-Y base of the triangle
        let c = TernaryCoords { n_o: 0.343, n_y: 0.592, n_x: 0.065 };
        let (px, py) = chart_position(&c);
        let side = CHART_SIZE - 120.0;
        let h = side * 3f64.sqrt() / 2.0;
        let base_y = 60.0 + h;
        // within the lowest 10% of the triangle height, strictly inside x-wise
        assert!(py > base_y - 0.10 * h);
        assert!(px > 60.0 && px < 60.0 + side);
    }

    #[test]
    fn chart_file_contains_labels_and_density_layer() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chart.svg");
        let points: Vec<(TernaryCoords, String)> = (0..25)
            .map(|i| {
                let o = 0.3 + 0.01 * i as f64;
                (TernaryCoords { n_o: o, n_y: 0.95 - o, n_x: 0.05 }, format!("p{i}"))
            })
            .collect();
        render_ternary_chart(&points, &path).unwrap();
        let svg = std::fs::read_to_string(&path).unwrap();
        assert!(svg.contains(">O</text>"));
        assert!(svg.contains(">Y</text>"));
        assert!(svg.contains(">X</text>"));
        assert!(svg.contains("data-layer=\"density\""));
        assert_eq!(svg.matches("<circle").count(), 25);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let points = vec![(TernaryCoords { n_o: 1.0, n_y: 0.0, n_x: 0.0 }, String::new())];
        let err = render_ternary_chart(&points, Path::new("/nonexistent-dir/x.svg"));
        assert!(matches!(err, Err(TopologyError::Io(_))));
    }
}
