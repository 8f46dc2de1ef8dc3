//! Topology-preserving thinning down to a one-pixel-wide skeleton.
//!
//! A pixel is deletable when removing it keeps both the foreground
//! 8-connectivity and the background 4-connectivity of its 3x3
//! neighborhood intact (a "simple" pixel). Thinning deletes simple
//! non-endpoint border pixels sequentially, sweeping the four border
//! directions in turn until nothing changes, then breaks any remaining
//! 2x2 blocks and repeats.

use super::BinaryMask;
use std::sync::OnceLock;

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

struct Luts {
    simple: [bool; 256],
    neighbor_count: [u8; 256],
}

/// Counts connected components among the 8 ring cells of a 3x3
/// neighborhood, restricted to cells where `want` holds, under the given
/// adjacency. For the background case only components touching a
/// 4-neighbor of the center matter.
fn ring_components(config: u8, want_fg: bool, eight_conn: bool, require_edge_adjacent: bool) -> u32 {
    let cell = |i: usize| (config >> i) & 1 == 1;
    let mut seen = [false; 8];
    let mut count = 0;
    for start in 0..8 {
        if seen[start] || cell(start) != want_fg {
            continue;
        }
        // flood this component over the ring
        let mut stack = vec![start];
        seen[start] = true;
        let mut touches_edge_neighbor = false;
        while let Some(i) = stack.pop() {
            if i % 2 == 0 {
                touches_edge_neighbor = true; // even ring indices are the 4-neighbors
            }
            for j in 0..8 {
                if seen[j] || cell(j) != want_fg {
                    continue;
                }
                let (ax, ay) = OFFSETS[i];
                let (bx, by) = OFFSETS[j];
                let (dx, dy) = ((ax - bx).abs(), (ay - by).abs());
                let adjacent = if eight_conn {
                    dx <= 1 && dy <= 1
                } else {
                    dx + dy == 1
                };
                if adjacent {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if !require_edge_adjacent || touches_edge_neighbor {
            count += 1;
        }
    }
    count
}

fn luts() -> &'static Luts {
    static LUTS: OnceLock<Luts> = OnceLock::new();
    LUTS.get_or_init(|| {
        let mut simple = [false; 256];
        let mut neighbor_count = [0u8; 256];
        for config in 0..256usize {
            let c = config as u8;
            neighbor_count[config] = c.count_ones() as u8;
            let fg_components = ring_components(c, true, true, false);
            let bg_components = ring_components(c, false, false, true);
            simple[config] = fg_components == 1 && bg_components == 1;
        }
        Luts { simple, neighbor_count }
    })
}

#[inline]
fn neighbor_config(data: &[bool], width: i64, height: i64, x: i64, y: i64) -> u8 {
    let mut config = 0u8;
    for (i, (dx, dy)) in OFFSETS.iter().enumerate() {
        let (nx, ny) = (x + dx, y + dy);
        if nx >= 0 && ny >= 0 && nx < width && ny < height && data[(ny * width + nx) as usize] {
            config |= 1 << i;
        }
    }
    config
}

/// Thins a mask to a one-pixel-wide skeleton. The result is a subset of the
/// input support, contains no 2x2 all-true block, and keeps the input's
/// 8-connected components and holes except in degenerate crossings where
/// thinness forces a local cut. Idempotent.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let luts = luts();
    let (width, height) = (mask.width as i64, mask.height as i64);
    let mut data = mask.data.clone();

    // Deleting only pixels whose background border faces one direction per
    // subpass keeps the skeleton centered; sequential deletion re-checks
    // each candidate against the current state so topology is never broken.
    let border_dirs: [usize; 4] = [2, 6, 0, 4]; // N, S, E, W ring indices
    loop {
        let mut any_deleted = false;
        for &dir in &border_dirs {
            for y in 0..height {
                for x in 0..width {
                    let idx = (y * width + x) as usize;
                    if !data[idx] {
                        continue;
                    }
                    let config = neighbor_config(&data, width, height, x, y);
                    if config & (1 << dir) != 0 {
                        continue; // not a border pixel from this direction
                    }
                    let (dx, dy) = OFFSETS[dir];
                    let (nx, ny) = (x + dx, y + dy);
                    let inside = nx >= 0 && ny >= 0 && nx < width && ny < height;
                    if !inside {
                        continue; // image edge is not a free border
                    }
                    if luts.neighbor_count[config as usize] <= 1 {
                        continue; // endpoint or isolated
                    }
                    if luts.simple[config as usize] {
                        data[idx] = false;
                        any_deleted = true;
                    }
                }
            }
        }
        if any_deleted {
            continue;
        }
        // Break residual 2x2 blocks; prefer a simple pixel so topology
        // survives, fall back to the most-connected corner otherwise.
        let mut broke = false;
        for y in 0..height - 1 {
            for x in 0..width - 1 {
                let quad = [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)];
                if !quad.iter().all(|&(qx, qy)| data[(qy * width + qx) as usize]) {
                    continue;
                }
                let mut victim = None;
                let mut fallback = (0u8, quad[0]);
                for &(qx, qy) in &quad {
                    let config = neighbor_config(&data, width, height, qx, qy);
                    if luts.simple[config as usize] {
                        victim = Some((qx, qy));
                        break;
                    }
                    let n = luts.neighbor_count[config as usize];
                    if n >= fallback.0 {
                        fallback = (n, (qx, qy));
                    }
                }
                let (vx, vy) = victim.unwrap_or(fallback.1);
                data[(vy * width + vx) as usize] = false;
                broke = true;
            }
        }
        if !broke {
            break;
        }
    }

    BinaryMask { width: mask.width, height: mask.height, data }
}
