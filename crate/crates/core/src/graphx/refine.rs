//! Post-extraction corrections: a fracture crossing the image border is not
//! an endpoint, and thinning sometimes splits one high-degree junction into
//! a few nearby nodes.

use super::{CrackGraph, Edge, Node};

/// Discards nodes lying within `margin` pixels of any image edge. Incident
/// chains survive as open edges with the border end unterminated, so the
/// crack itself still contributes to edge statistics while the false
/// endpoint no longer counts as an O node.
pub fn remove_border_nodes(g: &CrackGraph, margin: u32) -> CrackGraph {
    if margin == 0 {
        return g.clone();
    }
    let near_border = |n: &Node| {
        n.x < margin
            || n.y < margin
            || n.x.saturating_add(margin) > g.width - 1
            || n.y.saturating_add(margin) > g.height - 1
    };
    let mut remap = vec![None; g.nodes.len()];
    let mut nodes = Vec::new();
    for node in &g.nodes {
        if !near_border(node) {
            remap[node.id] = Some(nodes.len());
            nodes.push(Node { id: nodes.len(), ..*node });
        }
    }
    let edges = g
        .edges
        .iter()
        .map(|e| Edge {
            id: e.id,
            u: e.u.and_then(|u| remap[u]),
            v: e.v.and_then(|v| remap[v]),
            chain: e.chain.clone(),
        })
        .collect();
    let mut out = CrackGraph { nodes, edges, width: g.width, height: g.height };
    out.recompute_degrees();
    out
}

/// Merges nodes lying within `merge_dist` of each other (single-linkage,
/// transitive), repeating until no two nodes are that close. The merged node
/// sits at the rounded centroid of the original members. Edges that collapse
/// inside one cluster are deleted; parallel edges created by the merge are
/// collapsed to the lowest-id one.
pub fn merge_close_nodes(g: &CrackGraph, merge_dist: f64) -> CrackGraph {
    if merge_dist <= 0.0 || g.nodes.len() < 2 {
        return g.clone();
    }
    // (sum_x, sum_y, member_count) so centroids stay exact across rounds
    let mut mass: Vec<(f64, f64, usize)> =
        g.nodes.iter().map(|n| (f64::from(n.x), f64::from(n.y), 1)).collect();
    let mut pos: Vec<(f64, f64)> = g.nodes.iter().map(|n| (f64::from(n.x), f64::from(n.y))).collect();
    // cluster id per original node, refined over rounds
    let mut owner: Vec<usize> = (0..g.nodes.len()).collect();

    loop {
        let n = pos.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            let mut root = i;
            while parent[root] != root {
                root = parent[root];
            }
            let mut cur = i;
            while parent[cur] != root {
                let next = parent[cur];
                parent[cur] = root;
                cur = next;
            }
            root
        }
        let mut merged_any = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                if (dx * dx + dy * dy).sqrt() <= merge_dist {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                        merged_any = true;
                    }
                }
            }
        }
        if !merged_any {
            break;
        }
        // compact cluster ids in order of first appearance
        let mut cluster_id = vec![usize::MAX; n];
        let mut new_mass: Vec<(f64, f64, usize)> = Vec::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            if cluster_id[root] == usize::MAX {
                cluster_id[root] = new_mass.len();
                new_mass.push((0.0, 0.0, 0));
            }
            cluster_id[i] = cluster_id[root];
            let m = &mut new_mass[cluster_id[i]];
            m.0 += mass[i].0;
            m.1 += mass[i].1;
            m.2 += mass[i].2;
        }
        for o in &mut owner {
            *o = cluster_id[*o];
        }
        pos = new_mass
            .iter()
            .map(|(sx, sy, c)| (sx / *c as f64, sy / *c as f64))
            .collect();
        mass = new_mass;
    }

    let cluster_sizes: Vec<usize> = mass.iter().map(|m| m.2).collect();
    let nodes: Vec<Node> = pos
        .iter()
        .enumerate()
        .map(|(id, (x, y))| Node { id, x: x.round() as u32, y: y.round() as u32, degree: 0 })
        .collect();

    let mut edges: Vec<Edge> = Vec::new();
    let mut seen_pairs: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    for e in &g.edges {
        let u = e.u.map(|u| owner[u]);
        let v = e.v.map(|v| owner[v]);
        // edge fully inside one multi-node cluster: gone
        if let (Some(a), Some(b)) = (u, v) {
            if a == b && e.u != e.v {
                continue;
            }
            let touches_merged = cluster_sizes[a] > 1 || cluster_sizes[b] > 1;
            if touches_merged {
                let key = (a.min(b), a.max(b));
                if !seen_pairs.insert(key) {
                    continue; // parallel edge created by the merge
                }
            }
        }
        edges.push(Edge { id: edges.len(), u, v, chain: e.chain.clone() });
    }

    let mut out = CrackGraph { nodes, edges, width: g.width, height: g.height };
    out.recompute_degrees();
    out
}
