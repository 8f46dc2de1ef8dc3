//! Conversion of a one-pixel-wide skeleton into an undirected, unweighted
//! graph of junction/endpoint nodes and crack chains, plus the two
//! corrections applied after extraction: dropping false nodes at the image
//! border and merging junction nodes that thinning split apart.

mod refine;

pub use refine::{merge_close_nodes, remove_border_nodes};

use crate::imaging::BinaryMask;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("skeleton not thin: 2x2 block at ({0}, {1})")]
    NotThin(u32, u32),
}

/// A junction or endpoint of the crack network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: usize,
    pub x: u32,
    pub y: u32,
    /// Incident edge endpoints, self-loops counting twice.
    pub degree: usize,
}

/// One crack: a pixel chain connecting two nodes. An endpoint is `None` when
/// the crack runs off the analyzed area (its border node was discarded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: usize,
    pub u: Option<usize>,
    pub v: Option<usize>,
    /// Ordered pixels from the `u` end to the `v` end, terminal node pixels
    /// included; consecutive pixels are 8-adjacent.
    pub chain: Vec<(u32, u32)>,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.u.is_some() && self.u == self.v
    }

    /// Polygonal arc length of the raw chain in pixels.
    pub fn arc_length(&self) -> f64 {
        self.chain
            .windows(2)
            .map(|w| {
                let dx = f64::from(w[1].0) - f64::from(w[0].0);
                let dy = f64::from(w[1].1) - f64::from(w[0].1);
                (dx * dx + dy * dy).sqrt()
            })
            .sum()
    }
}

/// Undirected unweighted crack graph with per-node pixel coordinates and
/// per-edge pixel chains. Immutable after construction; the refinement
/// operations return new graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrackGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub width: u32,
    pub height: u32,
}

impl CrackGraph {
    /// Recomputes every node degree from the edge list.
    pub(crate) fn recompute_degrees(&mut self) {
        for node in &mut self.nodes {
            node.degree = 0;
        }
        let mut degree = vec![0usize; self.nodes.len()];
        for edge in &self.edges {
            if let Some(u) = edge.u {
                degree[u] += 1;
            }
            if let Some(v) = edge.v {
                degree[v] += 1;
            }
        }
        for (node, d) in self.nodes.iter_mut().zip(degree) {
            node.degree = d;
        }
    }

    /// Sum of degrees; equals 2x(non-loop edges) + 2x(self-loops) when both
    /// endpoints of every edge are present.
    pub fn degree_sum(&self) -> usize {
        self.nodes.iter().map(|n| n.degree).sum()
    }

    /// Multiset of neighbor node ids per node, self-loops contributing the
    /// node itself once per loop. Open edge ends contribute nothing.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for edge in &self.edges {
            match (edge.u, edge.v) {
                (Some(u), Some(v)) if u == v => adj[u].push(u),
                (Some(u), Some(v)) => {
                    adj[u].push(v);
                    adj[v].push(u);
                }
                (Some(u), None) | (None, Some(u)) => {
                    let _ = u; // open end: no neighbor
                }
                (None, None) => {}
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Neighbor offsets in ring order: E, NE, N, NW, W, SW, S, SE.
const OFFSETS: [(i64, i64); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Number of distinct skeleton branches meeting at a pixel: maximal runs of
/// foreground around the 8-neighbor ring, so a 4-neighbor and the diagonal
/// touching it count as one branch.
pub fn branch_count(mask: &BinaryMask, x: u32, y: u32) -> u32 {
    let (w, h) = (mask.width as i64, mask.height as i64);
    let mut bits = [false; 8];
    for (i, (dx, dy)) in OFFSETS.iter().enumerate() {
        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
        bits[i] = nx >= 0 && ny >= 0 && nx < w && ny < h && mask.get(nx as u32, ny as u32);
    }
    let mut runs = 0;
    for i in 0..8 {
        if bits[i] && !bits[(i + 7) % 8] {
            runs += 1;
        }
    }
    runs
}

/// Extracts the crack graph from a thinned skeleton.
///
/// Pixels whose branch count is 1 (endpoints) or >= 3 (junctions) become
/// node pixels; 8-connected clusters of node pixels collapse to a single
/// node at their rounded centroid. Chains of branch-count-2 pixels between
/// node clusters become edges; a closed loop with no node on it gets one
/// artificial degree-2 node at its smallest pixel. Isolated pixels and
/// degree-0 clusters are dropped.
pub fn extract_graph(skel: &BinaryMask) -> Result<CrackGraph, GraphError> {
    let (w, h) = (skel.width as i64, skel.height as i64);
    let idx = |x: i64, y: i64| (y * w + x) as usize;
    for y in 0..h.max(1) - 1 {
        for x in 0..w.max(1) - 1 {
            if skel.data[idx(x, y)]
                && skel.data[idx(x + 1, y)]
                && skel.data[idx(x, y + 1)]
                && skel.data[idx(x + 1, y + 1)]
            {
                return Err(GraphError::NotThin(x as u32, y as u32));
            }
        }
    }

    // classify pixels: 0 = background/off, 1 = chain, 2 = node pixel
    let mut class = vec![0u8; skel.data.len()];
    for y in 0..h {
        for x in 0..w {
            if !skel.data[idx(x, y)] {
                continue;
            }
            let b = branch_count(skel, x as u32, y as u32);
            class[idx(x, y)] = match b {
                2 => 1,
                0 => 0, // isolated pixel, dropped
                _ => 2,
            };
        }
    }

    // cluster node pixels (8-connected), one node per cluster at the centroid
    let mut cluster_of = vec![usize::MAX; skel.data.len()];
    let mut clusters: Vec<Vec<(i64, i64)>> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if class[idx(x, y)] != 2 || cluster_of[idx(x, y)] != usize::MAX {
                continue;
            }
            let c = clusters.len();
            let mut members = Vec::new();
            let mut stack = vec![(x, y)];
            cluster_of[idx(x, y)] = c;
            while let Some((cx, cy)) = stack.pop() {
                members.push((cx, cy));
                for (dx, dy) in OFFSETS {
                    let (nx, ny) = (cx + dx, cy + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    if class[idx(nx, ny)] == 2 && cluster_of[idx(nx, ny)] == usize::MAX {
                        cluster_of[idx(nx, ny)] = c;
                        stack.push((nx, ny));
                    }
                }
            }
            members.sort_unstable();
            clusters.push(members);
        }
    }

    let mut nodes: Vec<Node> = clusters
        .iter()
        .enumerate()
        .map(|(id, members)| {
            let sx: i64 = members.iter().map(|(x, _)| x).sum();
            let sy: i64 = members.iter().map(|(_, y)| y).sum();
            let n = members.len() as f64;
            Node {
                id,
                x: (sx as f64 / n).round() as u32,
                y: (sy as f64 / n).round() as u32,
                degree: 0,
            }
        })
        .collect();

    // trace chains from every cluster boundary into the degree-2 pixels
    let mut edges: Vec<Edge> = Vec::new();
    let mut chain_used = vec![false; skel.data.len()];
    let neighbors_of = |x: i64, y: i64| -> Vec<(i64, i64)> {
        let mut out = Vec::with_capacity(8);
        for (dx, dy) in OFFSETS {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0 && ny >= 0 && nx < w && ny < h && skel.data[idx(nx, ny)] {
                out.push((nx, ny));
            }
        }
        out
    };

    for (cid, members) in clusters.iter().enumerate() {
        for &(px, py) in members {
            // chain pixels adjacent to this cluster pixel, deterministic order
            for (dx, dy) in OFFSETS {
                let (sx, sy) = (px + dx, py + dy);
                if sx < 0 || sy < 0 || sx >= w || sy >= h {
                    continue;
                }
                if class[idx(sx, sy)] != 1 || chain_used[idx(sx, sy)] {
                    continue;
                }
                // walk the chain
                let mut chain = vec![(px as u32, py as u32)];
                let (mut prev, mut cur) = ((px, py), (sx, sy));
                let terminal;
                loop {
                    chain.push((cur.0 as u32, cur.1 as u32));
                    chain_used[idx(cur.0, cur.1)] = true;
                    let next = neighbors_of(cur.0, cur.1)
                        .into_iter()
                        .filter(|&(nx, ny)| {
                            (nx, ny) != prev
                                && (class[idx(nx, ny)] == 2
                                    || (class[idx(nx, ny)] == 1 && !chain_used[idx(nx, ny)]))
                        })
                        // prefer 4-adjacent steps so diagonal shortcuts do
                        // not skip over the true chain successor
                        .min_by_key(|&(nx, ny)| {
                            let manhattan = (nx - cur.0).abs() + (ny - cur.1).abs();
                            (manhattan, class[idx(nx, ny)] == 2, nx, ny)
                        });
                    match next {
                        Some((nx, ny)) if class[idx(nx, ny)] == 2 => {
                            chain.push((nx as u32, ny as u32));
                            terminal = Some(cluster_of[idx(nx, ny)]);
                            break;
                        }
                        Some((nx, ny)) => {
                            prev = cur;
                            cur = (nx, ny);
                        }
                        None => {
                            // dead end inside chain pixels: the walk returned
                            // next to its own start cluster (tight loop)
                            let back = neighbors_of(cur.0, cur.1)
                                .into_iter()
                                .find(|&(nx, ny)| class[idx(nx, ny)] == 2 && (nx, ny) != prev);
                            terminal = back.map(|(nx, ny)| {
                                chain.push((nx as u32, ny as u32));
                                cluster_of[idx(nx, ny)]
                            });
                            break;
                        }
                    }
                }
                let Some(other) = terminal else {
                    // chain ends free (single chain pixel adjacent only to
                    // the cluster); treat as loop back onto the cluster
                    edges.push(Edge {
                        id: edges.len(),
                        u: Some(cid),
                        v: Some(cid),
                        chain,
                    });
                    continue;
                };
                edges.push(Edge { id: edges.len(), u: Some(cid), v: Some(other), chain });
            }
        }
    }

    // direct cluster-to-cluster contacts never happen: adjacent node pixels
    // join the same 8-connected cluster.

    // leftover chain pixels form closed loops with no node anywhere on them
    for y in 0..h {
        for x in 0..w {
            if class[idx(x, y)] != 1 || chain_used[idx(x, y)] {
                continue;
            }
            let anchor = (x, y);
            let nid = nodes.len();
            let mut chain = vec![(x as u32, y as u32)];
            chain_used[idx(x, y)] = true;
            let (mut prev, mut cur) = (anchor, anchor);
            loop {
                let next = neighbors_of(cur.0, cur.1)
                    .into_iter()
                    .filter(|&(n0, n1)| class[idx(n0, n1)] == 1 && !chain_used[idx(n0, n1)] && (n0, n1) != prev)
                    .min_by_key(|&(n0, n1)| ((n0 - cur.0).abs() + (n1 - cur.1).abs(), n0, n1));
                match next {
                    Some(n) => {
                        chain.push((n.0 as u32, n.1 as u32));
                        chain_used[idx(n.0, n.1)] = true;
                        prev = cur;
                        cur = n;
                    }
                    None => break,
                }
            }
            chain.push((x as u32, y as u32)); // close the loop
            nodes.push(Node { id: nid, x: x as u32, y: y as u32, degree: 0 });
            edges.push(Edge { id: edges.len(), u: Some(nid), v: Some(nid), chain });
        }
    }

    let mut graph = CrackGraph { nodes, edges, width: skel.width, height: skel.height };
    graph.recompute_degrees();

    // drop degree-0 clusters (isolated node pixels / bare dominoes)
    let keep: Vec<bool> = graph.nodes.iter().map(|n| n.degree > 0).collect();
    if keep.iter().any(|k| !k) {
        let mut remap = vec![usize::MAX; graph.nodes.len()];
        let mut new_nodes = Vec::new();
        for (old, node) in graph.nodes.iter().enumerate() {
            if keep[old] {
                remap[old] = new_nodes.len();
                new_nodes.push(Node { id: new_nodes.len(), ..*node });
            }
        }
        for edge in &mut graph.edges {
            edge.u = edge.u.map(|u| remap[u]);
            edge.v = edge.v.map(|v| remap[v]);
        }
        graph.nodes = new_nodes;
        graph.recompute_degrees();
    }

    Ok(graph)
}
