//! Whole-network statistical features.
//!
//! Nine numbers summarize a crack network: orientation uniformity, length
//! mean and spread, node density, the three node-type fractions, the
//! edges-to-junctions ratio, and mean curvature. Closed islands are not
//! counted; node density together with node topography already carries
//! that information.

use crate::edgefit::{orientation, EdgeFit};
use crate::graphx::CrackGraph;
use crate::topology::NodeType;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty network: no classifiable nodes")]
    EmptyNetwork,
    #[error("no edges to build an orientation histogram from")]
    NoEdges,
    #[error("orientation histogram needs at least 2 bins, got {0}")]
    BadBins(usize),
}

/// Number of orientation bins: 18 bins of 10 degrees over [0, pi).
pub const ORIENTATION_BINS: usize = 18;

/// The nine-element feature vector.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StatFeatures {
    /// Standard deviation of the normalized orientation histogram.
    pub theta_sigma: f64,
    /// Mean crack length in pixels (polygonal arc length of the raw chain).
    pub l_mean: f64,
    /// Standard deviation of crack lengths in pixels.
    pub l_std: f64,
    /// Classified nodes per megapixel of image area.
    pub node_density: f64,
    pub frac_o: f64,
    pub frac_y: f64,
    pub frac_x: f64,
    /// Edges-to-junctions ratio.
    pub edges_per_junction: f64,
    /// Mean of per-edge curvature (mean |f''| along each fitted crack).
    pub curvature_mean: f64,
}

impl StatFeatures {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.theta_sigma,
            self.l_mean,
            self.l_std,
            self.node_density,
            self.frac_o,
            self.frac_y,
            self.frac_x,
            self.edges_per_junction,
            self.curvature_mean,
        ]
    }

    pub const CSV_HEADER: &'static str = "image,theta_sigma,l_mean,l_std,node_density,frac_o,frac_y,frac_x,edges_per_junction,curvature_mean,label";

    pub fn csv_row(&self, image: &str, label: &str) -> String {
        let v = self.to_vec();
        let fields: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
        format!("{image},{},{label}", fields.join(","))
    }
}

/// Length-weighted histogram of edge orientations over [0, pi), normalized
/// to sum to one. Each fitted part contributes its chord length to the bin
/// holding its orientation.
pub fn orientation_histogram(fits: &[&crate::edgefit::PolyEdge], bins: usize) -> Result<Vec<f64>, StatsError> {
    if bins < 2 {
        return Err(StatsError::BadBins(bins));
    }
    if fits.is_empty() {
        return Err(StatsError::NoEdges);
    }
    let mut hist = vec![0.0; bins];
    let mut total = 0.0;
    for pe in fits {
        let theta = orientation(pe);
        let mut bin = ((theta / std::f64::consts::PI) * bins as f64) as usize;
        if bin >= bins {
            bin = bins - 1;
        }
        hist[bin] += pe.chord_len;
        total += pe.chord_len;
    }
    if total > 0.0 {
        for h in &mut hist {
            *h /= total;
        }
    }
    Ok(hist)
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Computes the full feature vector from a graph, its per-edge fits, and the
/// node-type map. `fits` is aligned with `g.edges`; edges whose chain was
/// too short to fit carry `None` and only contribute their arc length.
pub fn compute_features(
    g: &CrackGraph,
    fits: &[Option<EdgeFit>],
    types: &BTreeMap<usize, NodeType>,
) -> Result<StatFeatures, StatsError> {
    if types.is_empty() {
        return Err(StatsError::EmptyNetwork);
    }
    assert_eq!(fits.len(), g.edges.len(), "fits must align with edges");

    let classified = types.len() as f64;
    let count = |t: NodeType| types.values().filter(|v| **v == t).count() as f64;
    let (frac_o, frac_y, frac_x) =
        (count(NodeType::O) / classified, count(NodeType::Y) / classified, count(NodeType::X) / classified);

    let lengths: Vec<f64> = g.edges.iter().map(|e| e.arc_length()).collect();
    let (l_mean, l_std) = if lengths.is_empty() {
        (0.0, 0.0)
    } else {
        (lengths.iter().sum::<f64>() / lengths.len() as f64, population_std(&lengths))
    };

    let parts: Vec<&crate::edgefit::PolyEdge> =
        fits.iter().flatten().flat_map(|f| f.parts()).collect();
    let theta_sigma = match orientation_histogram(&parts, ORIENTATION_BINS) {
        Ok(hist) => population_std(&hist),
        Err(StatsError::NoEdges) => 0.0,
        Err(e) => return Err(e),
    };

    let curvatures: Vec<f64> = fits.iter().flatten().map(|f| f.curvature()).collect();
    let curvature_mean = if curvatures.is_empty() {
        0.0
    } else {
        curvatures.iter().sum::<f64>() / curvatures.len() as f64
    };

    let area = f64::from(g.width) * f64::from(g.height);
    let node_density = classified / area * 1e6;
    let edges_per_junction = g.edges.len() as f64 / classified;

    Ok(StatFeatures {
        theta_sigma,
        l_mean,
        l_std,
        node_density,
        frac_o,
        frac_y,
        frac_x,
        edges_per_junction,
        curvature_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgefit::fit_edges;
    use crate::graphx::{Edge, Node};
    use crate::topology::classify_nodes;

    fn plus_sign_graph() -> CrackGraph {
        // center at (50,50), arms 10 px long, in a 100x100 image
        let mut nodes = vec![Node { id: 0, x: 50, y: 50, degree: 0 }];
        let mut edges = Vec::new();
        let dirs = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
        for (i, (dx, dy)) in dirs.iter().enumerate() {
            let ex = (50 + dx * 10) as u32;
            let ey = (50 + dy * 10) as u32;
            nodes.push(Node { id: i + 1, x: ex, y: ey, degree: 0 });
            let chain: Vec<(u32, u32)> = (0..=10)
                .map(|t| ((50 + dx * t) as u32, (50 + dy * t) as u32))
                .collect();
            edges.push(Edge { id: i, u: Some(0), v: Some(i + 1), chain });
        }
        let mut g = CrackGraph { nodes, edges, width: 100, height: 100 };
        g.recompute_degrees();
        g
    }

    #[test]
    fn plus_sign_features_are_fully_determined() {
        let g = plus_sign_graph();
        let chains: Vec<_> = g.edges.iter().map(|e| e.chain.clone()).collect();
        let fits = fit_edges(&chains, 4).unwrap();
        let types = classify_nodes(&g);
        let f = compute_features(&g, &fits, &types).unwrap();
        assert!((f.l_mean - 10.0).abs() < 1e-12);
        assert!(f.l_std.abs() < 1e-12);
        assert!((f.edges_per_junction - 0.8).abs() < 1e-12);
        assert!((f.frac_o - 0.8).abs() < 1e-12);
        assert_eq!(f.frac_y, 0.0);
        assert!((f.frac_x - 0.2).abs() < 1e-12);
        assert!((f.node_density - 500.0).abs() < 1e-12);
        assert!(f.curvature_mean.abs() < 1e-9);
    }

    #[test]
    fn triangle_has_one_edge_per_junction() {
        let pts = [(10u32, 10u32), (40, 10), (25, 35)];
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            nodes.push(Node { id: i, x, y, degree: 0 });
        }
        for i in 0..3 {
            let a = pts[i];
            let b = pts[(i + 1) % 3];
            edges.push(Edge { id: i, u: Some(i), v: Some((i + 1) % 3), chain: vec![a, b] });
        }
        let mut g = CrackGraph { nodes, edges, width: 50, height: 50 };
        g.recompute_degrees();
        let chains: Vec<_> = g.edges.iter().map(|e| e.chain.clone()).collect();
        let fits = fit_edges(&chains, 2).unwrap();
        let types = classify_nodes(&g);
        let f = compute_features(&g, &fits, &types).unwrap();
        assert!((f.edges_per_junction - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_horizontal_edges_fill_one_bin() {
        let g = plus_sign_graph();
        let chains: Vec<_> = g.edges.iter().map(|e| e.chain.clone()).collect();
        let fits = fit_edges(&chains, 1).unwrap();
        let horizontal: Vec<&crate::edgefit::PolyEdge> = fits
            .iter()
            .flatten()
            .flat_map(|f| f.parts())
            .filter(|p| p.chord_angle.abs() < 1e-9)
            .collect();
        let hist = orientation_histogram(&horizontal, ORIENTATION_BINS).unwrap();
        assert!((hist[0] - 1.0).abs() < 1e-12);
        assert!(hist[1..].iter().all(|h| *h == 0.0));
    }

    #[test]
    fn flat_histogram_has_zero_sigma() {
        // one unit-length edge per bin center
        let fits: Vec<crate::edgefit::PolyEdge> = (0..ORIENTATION_BINS)
            .map(|b| {
                let theta = (b as f64 + 0.5) * std::f64::consts::PI / ORIENTATION_BINS as f64;
                crate::edgefit::PolyEdge {
                    n: 1,
                    coeffs: vec![0.0, 0.0],
                    chord: [0.0, 0.0, theta.cos(), theta.sin()],
                    chord_angle: theta,
                    chord_len: 1.0,
                }
            })
            .collect();
        let refs: Vec<&crate::edgefit::PolyEdge> = fits.iter().collect();
        let hist = orientation_histogram(&refs, ORIENTATION_BINS).unwrap();
        assert!(population_std(&hist) < 1e-15);
    }

    #[test]
    fn histogram_matches_naive_accumulation() {
        let mut state = 0x777u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as f64 / f64::from(u32::MAX)
        };
        let fits: Vec<crate::edgefit::PolyEdge> = (0..60)
            .map(|_| {
                let theta = next() * std::f64::consts::PI;
                let len = 1.0 + next() * 40.0;
                crate::edgefit::PolyEdge {
                    n: 1,
                    coeffs: vec![0.0, 0.0],
                    chord: [0.0, 0.0, len * theta.cos(), len * theta.sin()],
                    chord_angle: theta,
                    chord_len: len,
                }
            })
            .collect();
        let refs: Vec<&crate::edgefit::PolyEdge> = fits.iter().collect();
        let hist = orientation_histogram(&refs, ORIENTATION_BINS).unwrap();
        // independent accumulation
        let mut expect = vec![0.0; ORIENTATION_BINS];
        let mut total = 0.0;
        for pe in &fits {
            let b = ((pe.chord_angle / std::f64::consts::PI) * 18.0).floor() as usize;
            expect[b.min(17)] += pe.chord_len;
            total += pe.chord_len;
        }
        for e in &mut expect {
            *e /= total;
        }
        for (a, b) in hist.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((hist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_edge_list_is_an_error() {
        assert!(matches!(
            orientation_histogram(&[], ORIENTATION_BINS),
            Err(StatsError::NoEdges)
        ));
    }

    #[test]
    fn zero_classified_nodes_is_an_error() {
        let g = CrackGraph { nodes: vec![], edges: vec![], width: 10, height: 10 };
        let types = BTreeMap::new();
        assert!(matches!(compute_features(&g, &[], &types), Err(StatsError::EmptyNetwork)));
    }

    #[test]
    fn features_are_finite_and_fractions_sum_to_one() {
        let g = plus_sign_graph();
        let chains: Vec<_> = g.edges.iter().map(|e| e.chain.clone()).collect();
        let fits = fit_edges(&chains, 4).unwrap();
        let types = classify_nodes(&g);
        let f = compute_features(&g, &fits, &types).unwrap();
        for v in f.to_vec() {
            assert!(v.is_finite());
        }
        assert!((f.frac_o + f.frac_y + f.frac_x - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn flips_leave_features_unchanged() {
        let g = plus_sign_graph();
        let mut flipped = g.clone();
        for n in &mut flipped.nodes {
            n.x = g.width - 1 - n.x;
        }
        for e in &mut flipped.edges {
            for p in &mut e.chain {
                p.0 = g.width - 1 - p.0;
            }
        }
        let feats = |gr: &CrackGraph| {
            let chains: Vec<_> = gr.edges.iter().map(|e| e.chain.clone()).collect();
            let fits = fit_edges(&chains, 4).unwrap();
            compute_features(gr, &fits, &classify_nodes(gr)).unwrap()
        };
        let a = feats(&g);
        let b = feats(&flipped);
        assert!((a.theta_sigma - b.theta_sigma).abs() < 1e-9);
        assert!((a.l_mean - b.l_mean).abs() < 1e-12);
        assert!((a.node_density - b.node_density).abs() < 1e-12);
        assert!((a.curvature_mean - b.curvature_mean).abs() < 1e-9);
    }

    #[test]
    fn uniform_rescaling_acts_as_expected() {
        // scale the plus sign by 3: lengths x3, density /9, curvature /3
        let g = plus_sign_graph();
        let mut scaled = g.clone();
        scaled.width *= 3;
        scaled.height *= 3;
        for n in &mut scaled.nodes {
            n.x *= 3;
            n.y *= 3;
        }
        for e in &mut scaled.edges {
            // resample the chain at unit steps so it stays a pixel chain
            let u = e.chain[0];
            let v = *e.chain.last().unwrap();
            let (sx, sy) = (u.0 * 3, u.1 * 3);
            let (tx, ty) = (v.0 * 3, v.1 * 3);
            let steps = (tx as i64 - sx as i64).abs().max((ty as i64 - sy as i64).abs());
            e.chain = (0..=steps)
                .map(|s| {
                    let x = sx as i64 + (tx as i64 - sx as i64) * s / steps;
                    let y = sy as i64 + (ty as i64 - sy as i64) * s / steps;
                    (x as u32, y as u32)
                })
                .collect();
        }
        let feats = |gr: &CrackGraph| {
            let chains: Vec<_> = gr.edges.iter().map(|e| e.chain.clone()).collect();
            let fits = fit_edges(&chains, 4).unwrap();
            compute_features(gr, &fits, &classify_nodes(gr)).unwrap()
        };
        let a = feats(&g);
        let b = feats(&scaled);
        assert!((b.l_mean - 3.0 * a.l_mean).abs() < 1e-9);
        assert!((b.node_density - a.node_density / 9.0).abs() < 1e-9);
        assert!((b.frac_o - a.frac_o).abs() < 1e-12);
        assert!((b.edges_per_junction - a.edges_per_junction).abs() < 1e-12);
        assert!((b.theta_sigma - a.theta_sigma).abs() < 1e-9);
    }
}
