//! Per-crack shape model: a polynomial fitted in a chord-aligned frame with
//! both endpoints interpolated exactly.
//!
//! Fitting raw image coordinates fails for vertical cracks, so every chain
//! is first rotated into a frame where its endpoints lie on the abscissa at
//! (0,0) and (chord_len,0). In that frame the endpoint constraints reduce
//! to "the polynomial vanishes at 0 and chord_len", which the factored
//! basis x(x - L) * x^j satisfies identically; the remaining coefficients
//! come from an ordinary least-squares solve. Orientation and curvature
//! then fall out of the first and second derivatives analytically.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("degenerate chord: endpoints coincide")]
    DegenerateChord,
    #[error("degenerate chain: not enough spread to fit order {0}")]
    DegenerateChain(usize),
    #[error("chain of {len} points is too short for order {order}")]
    TooShort { len: usize, order: usize },
    #[error("polynomial order must be 1..=8, got {0}")]
    BadOrder(usize),
}

/// Chord-frame polynomial description of one crack.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PolyEdge {
    /// Polynomial order (1..=8).
    pub n: usize,
    /// Coefficients a_0..a_n in the chord frame; a_0 is always 0 and the
    /// polynomial vanishes at `chord_len` as well.
    pub coeffs: Vec<f64>,
    /// Endpoints (x1, y1, x2, y2) in the image frame.
    pub chord: [f64; 4],
    /// Undirected chord direction in [0, pi).
    pub chord_angle: f64,
    pub chord_len: f64,
}

/// A chain mapped into its chord frame.
#[derive(Debug, Clone)]
pub struct ChordFrame {
    /// Points sorted by abscissa. When the rotated chain doubled back, the
    /// abscissae are arc-length projections onto [0, chord_len] instead.
    pub points: Vec<(f64, f64)>,
    /// Direction of the first-to-last endpoint vector, full circle.
    pub direction: f64,
    /// `direction` reduced modulo pi into [0, pi).
    pub chord_angle: f64,
    pub chord_len: f64,
    /// False when arc-length projection had to replace raw abscissae.
    pub monotone: bool,
    origin: (f64, f64),
}

fn mod_pi(angle: f64) -> f64 {
    let mut a = angle % std::f64::consts::PI;
    if a < 0.0 {
        a += std::f64::consts::PI;
    }
    if (a - std::f64::consts::PI).abs() < 1e-12 {
        a = 0.0;
    }
    a
}

/// Rigidly maps a chain into its chord frame: the first point goes to the
/// origin, the last to (chord_len, 0), and everything is rotated with them.
pub fn chord_frame(points: &[(f64, f64)]) -> Result<ChordFrame, FitError> {
    assert!(points.len() >= 2, "chord frame needs at least two points");
    let p0 = points[0];
    let p1 = *points.last().unwrap();
    let (dx, dy) = (p1.0 - p0.0, p1.1 - p0.1);
    let chord_len = (dx * dx + dy * dy).sqrt();
    if chord_len < 1e-9 {
        return Err(FitError::DegenerateChord);
    }
    let direction = dy.atan2(dx);
    let (cos_t, sin_t) = (direction.cos(), direction.sin());
    let mut frame: Vec<(f64, f64)> = points
        .iter()
        .map(|(x, y)| {
            let (rx, ry) = (x - p0.0, y - p0.1);
            (cos_t * rx + sin_t * ry, -sin_t * rx + cos_t * ry)
        })
        .collect();
    let monotone = frame.windows(2).all(|w| w[1].0 >= w[0].0);
    if !monotone {
        // S-shaped chains double back in x; re-parameterize over the
        // arc-length fraction so the model stays a single polynomial
        let mut s = 0.0;
        let mut arc = Vec::with_capacity(frame.len());
        arc.push(0.0);
        for w in frame.windows(2) {
            let (ddx, ddy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            s += (ddx * ddx + ddy * ddy).sqrt();
            arc.push(s);
        }
        for (i, p) in frame.iter_mut().enumerate() {
            p.0 = arc[i] / s * chord_len;
        }
    }
    frame.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(ChordFrame {
        points: frame,
        direction,
        chord_angle: mod_pi(direction),
        chord_len,
        monotone,
        origin: p0,
    })
}

/// Least-squares polynomial of order `n` through the chord-frame points,
/// constrained to pass through both endpoints exactly. Returns the fitted
/// edge and the RMS residual in pixels.
pub fn fit_polynomial(points: &[(f64, f64)], n: usize) -> Result<(PolyEdge, f64), FitError> {
    if !(1..=8).contains(&n) {
        return Err(FitError::BadOrder(n));
    }
    if points.len() < n + 1 {
        return Err(FitError::TooShort { len: points.len(), order: n });
    }
    let frame = chord_frame(points)?;
    fit_in_frame(&frame, n, points)
}

fn fit_in_frame(
    frame: &ChordFrame,
    n: usize,
    original: &[(f64, f64)],
) -> Result<(PolyEdge, f64), FitError> {
    let len = frame.chord_len;
    // average ordinates of points sharing an abscissa
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(frame.points.len());
    for &(u, w) in &frame.points {
        match samples.last_mut() {
            Some(last) if (u - last.0).abs() < 1e-9 => {
                last.1 = (last.1 + w) / 2.0;
            }
            _ => samples.push((u, w)),
        }
    }
    if samples.len() < 2 {
        return Err(FitError::DegenerateChain(n));
    }

    // coefficients in the normalized variable t = x / L for conditioning
    let free = n.saturating_sub(1);
    let mut coeffs_t = vec![0.0; n + 1];
    let mut betas = vec![0.0; free];
    if free > 0 {
        let m = samples.len();
        let mut design = DMatrix::zeros(m, free);
        let mut target = DVector::zeros(m);
        for (row, &(u, w)) in samples.iter().enumerate() {
            let t = u / len;
            let base = t * (t - 1.0);
            let mut tj = 1.0;
            for j in 0..free {
                design[(row, j)] = base * tj;
                tj *= t;
            }
            target[row] = w;
        }
        let svd = design.svd(true, true);
        let beta = svd
            .solve(&target, 1e-12)
            .map_err(|_| FitError::DegenerateChain(n))?;
        for j in 0..free {
            betas[j] = beta[j];
        }
        // expand (t^2 - t) * sum_j beta_j t^j into monomials
        for (j, &b) in betas.iter().enumerate() {
            coeffs_t[j + 2] += b;
            coeffs_t[j + 1] -= b;
        }
    }
    // back to the unnormalized chord-frame variable x: a_k = c_k / L^k
    let mut coeffs = vec![0.0; n + 1];
    let mut lk = 1.0;
    for k in 0..=n {
        coeffs[k] = coeffs_t[k] / lk;
        lk *= len;
    }

    let poly = PolyEdge {
        n,
        coeffs,
        chord: [
            frame.origin.0,
            frame.origin.1,
            original.last().unwrap().0,
            original.last().unwrap().1,
        ],
        chord_angle: frame.chord_angle,
        chord_len: len,
    };
    let mut sq = 0.0;
    for &(u, w) in &frame.points {
        let r = poly.eval_at(u) - w;
        sq += r * r;
    }
    let rms = (sq / frame.points.len() as f64).sqrt();
    Ok((poly, rms))
}

impl PolyEdge {
    /// f(x) in the chord frame, Horner in the normalized variable.
    pub fn eval_at(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// f'(x) = sum k a_k x^(k-1).
    pub fn derivative_at(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..=self.n).rev() {
            acc = acc * x + self.coeffs[k] * k as f64;
        }
        acc
    }

    /// f''(x) = sum k (k-1) a_k x^(k-2).
    pub fn second_derivative_at(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (2..=self.n).rev() {
            acc = acc * x + self.coeffs[k] * (k * (k - 1)) as f64;
        }
        acc
    }

    /// Values stored by this fit versus the two coordinates per raw pixel.
    pub fn compression_ratio(&self, chain_len: usize) -> f64 {
        1.0 - (self.n + 1) as f64 / (2 * chain_len) as f64
    }
}

/// Reconstructs the crack as a polyline in the image frame by sampling the
/// polynomial at equispaced abscissae and rotating back.
pub fn evaluate(pe: &PolyEdge, samples: usize) -> Vec<(f64, f64)> {
    assert!(samples >= 2, "need at least the two endpoints");
    let (x1, y1, x2, y2) = (pe.chord[0], pe.chord[1], pe.chord[2], pe.chord[3]);
    let direction = (y2 - y1).atan2(x2 - x1);
    let (cos_t, sin_t) = (direction.cos(), direction.sin());
    (0..samples)
        .map(|s| {
            let x = pe.chord_len * s as f64 / (samples - 1) as f64;
            let w = pe.eval_at(x);
            (x1 + cos_t * x - sin_t * w, y1 + sin_t * x + cos_t * w)
        })
        .collect()
}

/// Undirected edge orientation in [0, pi): the chord direction. In the
/// chord frame the linear term of an order-1 fit is zero, so the chord
/// itself carries the linear-approximation orientation.
pub fn orientation(pe: &PolyEdge) -> f64 {
    pe.chord_angle
}

/// Number of equispaced samples used for the mean |f''|.
pub const CURVATURE_SAMPLES: usize = 32;

/// Mean absolute second derivative along the fitted curve; exactly |2 a_2|
/// for the parabolic model, 0 for order-1 fits.
pub fn curvature(pe: &PolyEdge) -> f64 {
    if pe.n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for s in 0..CURVATURE_SAMPLES {
        let x = pe.chord_len * s as f64 / (CURVATURE_SAMPLES - 1) as f64;
        acc += pe.second_derivative_at(x).abs();
    }
    acc / CURVATURE_SAMPLES as f64
}

/// Fit attached to one graph edge. Closed loops cannot use a single chord,
/// so they are split at the point farthest from the anchor and described by
/// two half-fits.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum EdgeFit {
    Whole(PolyEdge),
    Split(PolyEdge, PolyEdge),
}

impl EdgeFit {
    pub fn parts(&self) -> impl Iterator<Item = &PolyEdge> {
        let (first, second) = match self {
            EdgeFit::Whole(p) => (p, None),
            EdgeFit::Split(a, b) => (a, Some(b)),
        };
        std::iter::once(first).chain(second)
    }

    pub fn stored_values(&self) -> usize {
        self.parts().map(|p| p.n + 1).sum()
    }

    /// Mean curvature of the underlying edge: the plain average over parts.
    pub fn curvature(&self) -> f64 {
        let parts: Vec<f64> = self.parts().map(curvature).collect();
        parts.iter().sum::<f64>() / parts.len() as f64
    }
}

/// Fits every edge chain of a graph, reducing the order on short chains and
/// splitting closed loops. Chains shorter than two points are skipped with
/// `None`.
pub fn fit_edges(
    chains: &[Vec<(u32, u32)>],
    order: usize,
) -> Result<Vec<Option<EdgeFit>>, FitError> {
    if !(1..=8).contains(&order) {
        return Err(FitError::BadOrder(order));
    }
    chains
        .iter()
        .map(|chain| {
            if chain.len() < 2 {
                return Ok(None);
            }
            let pts: Vec<(f64, f64)> =
                chain.iter().map(|&(x, y)| (f64::from(x), f64::from(y))).collect();
            let n = order.min(pts.len() - 1);
            match fit_polynomial(&pts, n) {
                Ok((pe, _)) => Ok(Some(EdgeFit::Whole(pe))),
                Err(FitError::DegenerateChord) => {
                    let (a, b) = split_loop(&pts);
                    if a.len() < 2 || b.len() < 2 {
                        return Ok(None);
                    }
                    let (pa, _) = fit_polynomial(&a, order.min(a.len() - 1))?;
                    let (pb, _) = fit_polynomial(&b, order.min(b.len() - 1))?;
                    Ok(Some(EdgeFit::Split(pa, pb)))
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Splits a closed chain at the point farthest from its first pixel.
fn split_loop(pts: &[(f64, f64)]) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let anchor = pts[0];
    let far = pts
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            let da = (a.0 - anchor.0).powi(2) + (a.1 - anchor.1).powi(2);
            let db = (b.0 - anchor.0).powi(2) + (b.1 - anchor.1).powi(2);
            da.partial_cmp(&db).unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();
    (pts[..=far].to_vec(), pts[far..].to_vec())
}
