//! Single-letter private information of binary-input wiretap channels.
//!
//! For a binary input the auxiliary variable needs at most two values, so
//! `P₁` is the largest gap between `f_W` and its lower convex envelope. The
//! envelope is built on a uniform grid and the best gap is then refined
//! continuously; the result always comes with an explicit two-point
//! ensemble, so the reported value is achievable and never overstated by
//! the refinement.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{InputDistribution, WiretapChannel};
use crate::entropy::{f_w, h2_unchecked, BinaryObjective};
use crate::error::{Error, Result};
use crate::linalg::fidelity;
use crate::optim::{bisect, golden_max, nelder_mead, NelderMeadOptions};
use crate::tolerances::Tolerances;

/// Default number of grid points on `[0, 1]`.
pub const DEFAULT_GRID_POINTS: usize = 4097;

/// Interior grid used by the convexity flags of [`classify`].
pub const CURVATURE_GRID_INTERVALS: usize = 256;

const GOLDEN_TOL: f64 = 1e-12;
const REFINE_ROUNDS: usize = 4;

/// Samples `f` at `i / (n−1)`, in parallel, merged by index.
pub fn sample_grid(f: impl Fn(f64) -> f64 + Sync, n: usize) -> Vec<(f64, f64)> {
    let last = (n - 1) as f64;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let q = i as f64 / last;
            (q, f(q))
        })
        .collect()
}

/// Indices of the lower convex hull of points sorted by `x` (monotone chain).
/// Collinear interior points are dropped.
pub fn lower_convex_hull(points: &[(f64, f64)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for (i, &(x, y)) in points.iter().enumerate() {
        while hull.len() >= 2 {
            let (xa, ya) = points[hull[hull.len() - 2]];
            let (xb, yb) = points[hull[hull.len() - 1]];
            // Pop b when it does not lie strictly below the chord a–i.
            if (yb - ya) * (x - xa) >= (y - ya) * (xb - xa) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Piecewise-linear interpolation of the hull onto every grid abscissa.
pub(crate) fn envelope_values(points: &[(f64, f64)], hull: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let mut seg = 0;
    for (i, &(x, y)) in points.iter().enumerate() {
        while seg + 1 < hull.len() && hull[seg + 1] < i {
            seg += 1;
        }
        if hull.len() == 1 || hull[seg] == i {
            out.push(y);
            continue;
        }
        let (xa, ya) = points[hull[seg]];
        let (xb, yb) = points[hull[seg + 1]];
        if hull[seg + 1] == i {
            out.push(yb);
        } else {
            out.push(ya + (yb - ya) * (x - xa) / (xb - xa));
        }
    }
    out
}

/// Two-point ensemble `{(w_k, q_k)}`: with probability `w_k` the sender
/// uses input `(q_k, 1−q_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryEnsemble {
    pub weights: [f64; 2],
    pub points: [f64; 2],
}

impl BinaryEnsemble {
    /// Average input `Σ w_k q_k`.
    pub fn mean(&self) -> f64 {
        self.weights[0] * self.points[0] + self.weights[1] * self.points[1]
    }

    /// `I(V:B) − I(V:C)` of this ensemble, evaluated from scratch with
    /// [`f_w`]: `f(mean) − Σ w_k f(q_k)`.
    pub fn rate(&self, w: &WiretapChannel) -> Result<f64> {
        let at = |q: f64| InputDistribution::binary(q.clamp(0.0, 1.0)).and_then(|px| f_w(w, &px));
        let mut v = at(self.mean())?;
        for k in 0..2 {
            if self.weights[k] > 0.0 {
                v -= self.weights[k] * at(self.points[k])?;
            }
        }
        Ok(v)
    }
}

/// Output of [`p1_binary`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeResult {
    /// `(q, f(q))` samples on the uniform grid.
    pub grid: Vec<(f64, f64)>,
    /// Lower convex envelope of the samples, one value per grid point.
    pub envelope: Vec<f64>,
    /// Input weight `q*` on letter 0 where the gap is largest.
    pub gap_argmax: f64,
    /// Private information in bits.
    pub p1: f64,
    /// Ensemble attaining `p1`.
    pub ensemble: BinaryEnsemble,
}

fn require_binary(w: &WiretapChannel) -> Result<BinaryObjective> {
    if w.input_size() != 2 {
        return Err(Error::Unsupported(format!(
            "this routine handles binary inputs only (channel has {} letters); use ensemble_search",
            w.input_size()
        )));
    }
    BinaryObjective::new(w)
}

/// `P₁` of a binary-input channel on the default grid.
pub fn p1_binary(w: &WiretapChannel) -> Result<EnvelopeResult> {
    p1_binary_with(w, DEFAULT_GRID_POINTS)
}

pub fn p1_binary_with(w: &WiretapChannel, grid_points: usize) -> Result<EnvelopeResult> {
    let obj = require_binary(w)?;
    Ok(envelope_gap(|q| obj.value(q), grid_points.max(3)))
}

/// Envelope-gap maximization for any scalar function on `[0, 1]`.
pub fn envelope_gap(f: impl Fn(f64) -> f64 + Sync, grid_points: usize) -> EnvelopeResult {
    let grid = sample_grid(&f, grid_points);
    let hull = lower_convex_hull(&grid);
    let envelope = envelope_values(&grid, &hull);

    let mut best_i = 0;
    let mut best_gap = f64::NEG_INFINITY;
    for (i, (&(_, y), &e)) in grid.iter().zip(&envelope).enumerate() {
        if y - e > best_gap {
            best_gap = y - e;
            best_i = i;
        }
    }

    let qm = grid[best_i].0;
    if best_gap <= 0.0 || hull.len() < 2 {
        return EnvelopeResult {
            grid,
            envelope,
            gap_argmax: qm,
            p1: 0.0,
            ensemble: BinaryEnsemble {
                weights: [1.0, 0.0],
                points: [qm, qm],
            },
        };
    }

    let seg = hull.partition_point(|&h| h < best_i).max(1) - 1;
    let (ia, ib) = (hull[seg], hull[seg + 1]);
    let (a, m, b, p1) = refine_gap(
        &f,
        grid[ia].0,
        qm,
        grid[ib].0,
        1.0 / (grid_points - 1) as f64,
    );
    let p1 = p1.max(0.0);
    EnvelopeResult {
        grid,
        envelope,
        gap_argmax: m,
        p1,
        ensemble: BinaryEnsemble {
            weights: [(b - m) / (b - a), (m - a) / (b - a)],
            points: [a, b],
        },
    }
}

/// Coordinate ascent on the gap `f(m) − chord_{a,b}(m)` with golden-section
/// steps of width `h` around each coordinate. Moves are accepted only when
/// they improve the gap.
fn refine_gap(f: &impl Fn(f64) -> f64, a0: f64, m0: f64, b0: f64, h: f64) -> (f64, f64, f64, f64) {
    let gap = |a: f64, m: f64, b: f64| {
        if b - a <= 0.0 || m < a || m > b {
            return f64::NEG_INFINITY;
        }
        f(m) - ((b - m) * f(a) + (m - a) * f(b)) / (b - a)
    };
    let (mut a, mut m, mut b) = (a0, m0, b0);
    let mut best = gap(a, m, b);
    for _ in 0..REFINE_ROUNDS {
        let before = best;
        let (x, v) = golden_max(|x| gap(a, x, b), (m - h).max(a), (m + h).min(b), GOLDEN_TOL);
        if v > best {
            m = x;
            best = v;
        }
        let (x, v) = golden_max(
            |x| gap(x, m, b),
            (a - h).max(0.0),
            (a + h).min(m),
            GOLDEN_TOL,
        );
        if v > best {
            a = x;
            best = v;
        }
        let (x, v) = golden_max(
            |x| gap(a, m, x),
            (b - h).max(m),
            (b + h).min(1.0),
            GOLDEN_TOL,
        );
        if v > best {
            b = x;
            best = v;
        }
        if best - before <= 1e-16 {
            break;
        }
    }
    (a, m, b, best)
}

/// `P₀ = max_p f_W(p)` with its maximizer.
///
/// Binary inputs use a grid scan plus golden-section refinement; larger
/// alphabets use Nelder–Mead over a softmax parameterization, restarted from
/// the uniform distribution and every vertex neighbourhood.
pub fn p0(w: &WiretapChannel) -> Result<(f64, InputDistribution)> {
    if w.input_size() == 2 {
        let obj = BinaryObjective::new(w)?;
        let (q, v) = grid_extremum(|q| obj.value(q), DEFAULT_GRID_POINTS, true);
        return Ok((v, InputDistribution::binary(q)?));
    }
    let k = w.input_size();
    let softmax = |theta: &[f64]| {
        let mx = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = theta.iter().map(|t| (t - mx).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| v / s).collect::<Vec<f64>>()
    };
    let value = |theta: &[f64]| {
        let p = softmax(theta);
        InputDistribution::new(p)
            .and_then(|px| f_w(w, &px))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let mut starts = vec![vec![0.0; k]];
    for x in 0..k {
        let mut s = vec![0.0; k];
        s[x] = 4.0;
        starts.push(s);
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in starts {
        let (theta, v) = nelder_mead(|t| -value(t), &s, NelderMeadOptions::default());
        if best.as_ref().is_none_or(|(bv, _)| -v > *bv) {
            best = Some((-v, theta));
        }
    }
    let (v, theta) = best.expect("at least one start");
    // Vertices are always candidates: f_W vanishes there.
    if v < 0.0 {
        return Ok((0.0, InputDistribution::point_mass(k, 0)));
    }
    Ok((v, InputDistribution::new(softmax(&theta))?))
}

/// Max (or min) of `f` on `[0, 1]`: grid scan with smallest-q tie-breaking,
/// then golden-section within one grid step.
/// Uniform grid plus geometrically spaced points approaching both ends, so
/// that features confined to `q ≲ 1/n` (where the entropy terms have
/// unbounded slope) are not missed.
fn extremum_samples(n: usize) -> Vec<f64> {
    let mut qs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mut e = -15.0;
    while e < -(n as f64).log10() {
        let q = 10f64.powf(e);
        qs.push(q);
        qs.push(1.0 - q);
        e += 0.25;
    }
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    qs
}

fn grid_extremum(f: impl Fn(f64) -> f64 + Sync, n: usize, maximize: bool) -> (f64, f64) {
    let sign = if maximize { 1.0 } else { -1.0 };
    let qs = extremum_samples(n);
    let values: Vec<f64> = qs.par_iter().map(|&q| sign * f(q)).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    let lo = qs[best.saturating_sub(1)];
    let hi = qs[(best + 1).min(qs.len() - 1)];
    let (q, v) = golden_max(
        |q| sign * f(q),
        lo,
        hi,
        (GOLDEN_TOL * (hi - lo)).max(f64::EPSILON * hi),
    );
    if v > values[best] {
        (q, sign * v)
    } else {
        (qs[best], sign * values[best])
    }
}

/// `max f − min f`, an upper bound on `P₁` for binary inputs.
pub fn upper_bound(w: &WiretapChannel) -> Result<f64> {
    let obj = require_binary(w)?;
    let (_, hi) = grid_extremum(|q| obj.value(q), DEFAULT_GRID_POINTS, true);
    let (_, lo) = grid_extremum(|q| obj.value(q), DEFAULT_GRID_POINTS, false);
    Ok(hi - lo)
}

/// Three-valued outcome of a sampled test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Yes,
    No,
    Undetermined,
}

impl Flag {
    fn from_bool(b: bool) -> Self {
        if b {
            Flag::Yes
        } else {
            Flag::No
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::Yes => "yes",
            Flag::No => "no",
            Flag::Undetermined => "undetermined",
        })
    }
}

/// Evidence for a "no" flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `f_W(q)` has the wrong sign.
    Value { q: f64, f: f64 },
    /// The second difference at `q` has the wrong sign.
    Curvature { q: f64, second_difference: f64 },
    /// Root fidelities of the two output pairs.
    Fidelity { bob: f64, charlie: f64 },
}

/// Degradability and capability flags of a binary-input channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub more_capable: Flag,
    pub anti_more_capable: Flag,
    pub less_noisy: Flag,
    pub anti_less_noisy: Flag,
    pub degradable: Flag,
    pub anti_degradable: Flag,
    /// Keyed by flag name; present for every flag that came out "no".
    pub witnesses: BTreeMap<&'static str, Witness>,
}

/// Classifies `w` from sampled values of `f_W` and output fidelities.
pub fn classify(w: &WiretapChannel) -> Result<ClassificationReport> {
    classify_with(w, &Tolerances::DEFAULT)
}

pub fn classify_with(w: &WiretapChannel, tol: &Tolerances) -> Result<ClassificationReport> {
    let obj = require_binary(w)?;
    let mut witnesses = BTreeMap::new();

    let (qmin, fmin) = grid_extremum(|q| obj.value(q), DEFAULT_GRID_POINTS, false);
    let (qmax, fmax) = grid_extremum(|q| obj.value(q), DEFAULT_GRID_POINTS, true);
    let more_capable = Flag::from_bool(fmin >= -tol.zero_band);
    if more_capable == Flag::No {
        witnesses.insert("more_capable", Witness::Value { q: qmin, f: fmin });
    }
    let anti_more_capable = Flag::from_bool(fmax <= tol.zero_band);
    if anti_more_capable == Flag::No {
        witnesses.insert("anti_more_capable", Witness::Value { q: qmax, f: fmax });
    }

    let n = CURVATURE_GRID_INTERVALS;
    let h = 1.0 / n as f64;
    let values: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|i| obj.value(i as f64 * h))
        .collect();
    let curvature: Vec<(f64, f64)> = (1..n)
        .map(|i| {
            (
                i as f64 * h,
                (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h),
            )
        })
        .collect();
    let (qc_max, d_max) =
        curvature
            .iter()
            .skip(1)
            .fold(curvature[0], |a, &p| if p.1 > a.1 { p } else { a });
    let (qc_min, d_min) =
        curvature
            .iter()
            .skip(1)
            .fold(curvature[0], |a, &p| if p.1 < a.1 { p } else { a });
    let less_noisy = Flag::from_bool(d_max <= tol.convexity_band);
    if less_noisy == Flag::No {
        witnesses.insert(
            "less_noisy",
            Witness::Curvature {
                q: qc_max,
                second_difference: d_max,
            },
        );
    }
    let anti_less_noisy = Flag::from_bool(d_min >= -tol.convexity_band);
    if anti_less_noisy == Flag::No {
        witnesses.insert(
            "anti_less_noisy",
            Witness::Curvature {
                q: qc_min,
                second_difference: d_min,
            },
        );
    }

    let fb = fidelity(w.bob().output(0), w.bob().output(1))?;
    let fc = fidelity(w.charlie().output(0), w.charlie().output(1))?;
    let witness = Witness::Fidelity {
        bob: fb,
        charlie: fc,
    };
    let degradable = if w.bob().has_pure_outputs(tol) {
        Flag::from_bool(fc >= fb - tol.fidelity_slack)
    } else {
        Flag::Undetermined
    };
    if degradable == Flag::No {
        witnesses.insert("degradable", witness);
    }
    let anti_degradable = if w.charlie().has_pure_outputs(tol) {
        Flag::from_bool(fb >= fc - tol.fidelity_slack)
    } else {
        Flag::Undetermined
    };
    if anti_degradable == Flag::No {
        witnesses.insert("anti_degradable", witness);
    }

    Ok(ClassificationReport {
        more_capable,
        anti_more_capable,
        less_noisy,
        anti_less_noisy,
        degradable,
        anti_degradable,
        witnesses,
    })
}

/// Threshold parameters of the named families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    /// `r̂`: quantum-Bob family is anti-less-noisy for `r ≥ r̂`.
    BobLessNoisy,
    /// Quantum-Bob family is anti-more-capable beyond this `r`.
    BobMoreCapable,
    /// `r̃ = (3−√5)/2`: quantum-Bob family is degradable for `r ≤ r̃`.
    BobDegradable,
    /// `p̂`: quantum-Eve family is anti-less-noisy for `p ≥ p̂`.
    EveLessNoisy,
    /// `p̃ = (2−√2)/4`: quantum-Eve family is anti-degradable for `p ≥ p̃`.
    EveDegradable,
}

impl ThresholdKind {
    pub const ALL: [ThresholdKind; 5] = [
        ThresholdKind::BobLessNoisy,
        ThresholdKind::BobMoreCapable,
        ThresholdKind::BobDegradable,
        ThresholdKind::EveLessNoisy,
        ThresholdKind::EveDegradable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ThresholdKind::BobLessNoisy => "bob_less_noisy",
            ThresholdKind::BobMoreCapable => "bob_more_capable",
            ThresholdKind::BobDegradable => "bob_degradable",
            ThresholdKind::EveLessNoisy => "eve_less_noisy",
            ThresholdKind::EveDegradable => "eve_degradable",
        }
    }

    /// Bisection bracket for the root-solved kinds.
    pub fn bracket(self) -> (f64, f64) {
        match self {
            ThresholdKind::BobLessNoisy
            | ThresholdKind::BobMoreCapable
            | ThresholdKind::BobDegradable => (0.4, 0.7),
            ThresholdKind::EveLessNoisy | ThresholdKind::EveDegradable => (0.05, 0.2),
        }
    }

    /// Residual of the defining equation; the threshold is its root.
    ///
    /// * `bob_less_noisy`: `2r²(r−2)/(r²−1) − ln((1+r)/(1−r))`
    /// * `bob_more_capable`: `h₂((1−r)/2) − r(2−r)`, i.e. `f_W` at the uniform input
    /// * `bob_degradable`: `(1−r)² − r`
    /// * `eve_less_noisy`: `(1−2p)³/(2p(1−p)) − ln((1−p)/p)`
    /// * `eve_degradable`: `2√(p(1−p)) − (1−2p)`
    pub fn residual(self, x: f64) -> f64 {
        match self {
            ThresholdKind::BobLessNoisy => {
                2.0 * x * x * (x - 2.0) / (x * x - 1.0) - ((1.0 + x) / (1.0 - x)).ln()
            }
            ThresholdKind::BobMoreCapable => h2_unchecked((1.0 - x) / 2.0) - x * (2.0 - x),
            ThresholdKind::BobDegradable => (1.0 - x) * (1.0 - x) - x,
            ThresholdKind::EveLessNoisy => {
                (1.0 - 2.0 * x).powi(3) / (2.0 * x * (1.0 - x)) - ((1.0 - x) / x).ln()
            }
            ThresholdKind::EveDegradable => 2.0 * (x * (1.0 - x)).sqrt() - (1.0 - 2.0 * x),
        }
    }
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThresholdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown threshold kind {s:?}")))
    }
}

/// Solves for the threshold; the degradability kinds use their radicals.
pub fn solve_threshold(kind: ThresholdKind) -> Result<f64> {
    match kind {
        ThresholdKind::BobDegradable => Ok((3.0 - 5f64.sqrt()) / 2.0),
        ThresholdKind::EveDegradable => Ok((2.0 - 2f64.sqrt()) / 4.0),
        _ => {
            let (lo, hi) = kind.bracket();
            bisect(|x| kind.residual(x), lo, hi, 1e-12)
        }
    }
}

/// Result of [`ensemble_search`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSearchResult {
    pub value: f64,
    pub weights: Vec<f64>,
    pub points: Vec<f64>,
}

/// Random-restart search over `k`-point ensembles of binary inputs,
/// maximizing `f(Σ w_i q_i) − Σ w_i f(q_i)`. Never needed for binary inputs
/// in principle (two points suffice); it exists to check that claim.
pub fn ensemble_search(
    w: &WiretapChannel,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<EnsembleSearchResult> {
    let obj = require_binary(w)?;
    if k == 0 {
        return Err(Error::Validation(
            "ensemble needs at least one point".into(),
        ));
    }
    let decode = |theta: &[f64]| {
        let points: Vec<f64> = theta[..k]
            .iter()
            .map(|t| 1.0 / (1.0 + (-t).exp()))
            .collect();
        let mx = theta[k..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = theta[k..].iter().map(|t| (t - mx).exp()).collect();
        let s: f64 = e.iter().sum();
        (e.into_iter().map(|v| v / s).collect::<Vec<f64>>(), points)
    };
    let value = |theta: &[f64]| {
        let (weights, points) = decode(theta);
        let mean: f64 = weights.iter().zip(&points).map(|(w, q)| w * q).sum();
        obj.value(mean)
            - weights
                .iter()
                .zip(&points)
                .map(|(w, &q)| w * obj.value(q))
                .sum::<f64>()
    };
    let best = (0..restarts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let x0: Vec<f64> = (0..2 * k).map(|_| rng.random_range(-3.0..3.0)).collect();
            let opts = NelderMeadOptions {
                step: 1.0,
                ..Default::default()
            };
            let (theta, v) = nelder_mead(|t| -value(t), &x0, opts);
            (i, -v, theta)
        })
        .reduce_with(|a, b| {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("at least one restart");
    let (weights, points) = decode(&best.2);
    Ok(EnsembleSearchResult {
        value: value(&best.2),
        weights,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{bpc, quantum_bob, quantum_eve, wiretap};
    use crate::entropy::h2;

    #[test]
    fn hull_of_convex_points_keeps_everything() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| (i as f64, (i as f64 - 4.5).powi(2)))
            .collect();
        assert_eq!(lower_convex_hull(&pts), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn hull_of_concave_points_is_the_chord() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| (i as f64, -(i as f64 - 4.5).powi(2)))
            .collect();
        assert_eq!(lower_convex_hull(&pts), vec![0, 9]);
    }

    #[test]
    fn envelope_gap_of_a_bump() {
        // f = sin(πq) has envelope 0 and gap 1 at q = ½.
        let res = envelope_gap(|q| (std::f64::consts::PI * q).sin(), 1025);
        assert!((res.p1 - 1.0).abs() < 1e-12);
        assert!((res.gap_argmax - 0.5).abs() < 1e-6);
        assert_eq!(res.ensemble.points, [0.0, 1.0]);
    }

    #[test]
    fn envelope_result_invariants() {
        let res = p1_binary(&quantum_bob(0.5).unwrap()).unwrap();
        for ((_, y), e) in res.grid.iter().zip(&res.envelope) {
            assert!(*e <= y + 1e-12);
            assert!(res.p1 >= y - e - 1e-15);
        }
        for k in 1..res.envelope.len() - 1 {
            assert!(res.envelope[k + 1] - 2.0 * res.envelope[k] + res.envelope[k - 1] >= -1e-12);
        }
    }

    #[test]
    fn ensemble_reproduces_p1() {
        for w in [
            quantum_bob(0.45).unwrap(),
            quantum_bob(0.53).unwrap(),
            quantum_eve(0.1).unwrap(),
        ] {
            let res = p1_binary(&w).unwrap();
            let direct = res.ensemble.rate(&w).unwrap();
            assert!((direct - res.p1).abs() < 1e-9, "{} vs {}", direct, res.p1);
        }
    }

    #[test]
    fn p0_examples() {
        let (v, px) = p0(&quantum_eve(0.05).unwrap()).unwrap();
        assert!((v - (1.0 - 2.0 * h2(0.05).unwrap())).abs() < 1e-10);
        assert!((px.probabilities()[0] - 0.5).abs() < 1e-4);
        let c = bpc(0.2).unwrap();
        assert!(p0(&wiretap(c.clone(), c).unwrap()).unwrap().0.abs() < 1e-12);
        assert!(p0(&quantum_bob(0.55).unwrap()).unwrap().0 <= 1e-9);
    }

    #[test]
    fn p1_examples() {
        let w = quantum_bob(0.3).unwrap();
        assert!((p1_binary(&w).unwrap().p1 - p0(&w).unwrap().0).abs() < 1e-6);
        assert!(p1_binary(&quantum_bob(0.55).unwrap()).unwrap().p1 <= 1e-9);
        assert!(p1_binary(&quantum_eve(0.13).unwrap()).unwrap().p1 <= 1e-9);
    }

    #[test]
    fn upper_bound_examples() {
        let c = bpc(0.2).unwrap();
        assert!(upper_bound(&wiretap(c.clone(), c).unwrap()).unwrap().abs() < 1e-12);
        let w = quantum_bob(0.3).unwrap();
        assert!((upper_bound(&w).unwrap() - p0(&w).unwrap().0).abs() < 1e-12);
        let w = quantum_bob(0.543).unwrap();
        assert!(upper_bound(&w).unwrap() >= p1_binary(&w).unwrap().p1);
    }

    #[test]
    fn classify_examples() {
        let rep = classify(&quantum_bob(0.3).unwrap()).unwrap();
        assert_eq!(rep.degradable, Flag::Yes);
        assert_eq!(rep.more_capable, Flag::Yes);
        let rep = classify(&quantum_eve(0.2).unwrap()).unwrap();
        assert_eq!(rep.anti_degradable, Flag::Yes);
        let rep = classify(&quantum_bob(0.55).unwrap()).unwrap();
        assert_eq!(rep.anti_less_noisy, Flag::Yes);
        assert_eq!(rep.anti_more_capable, Flag::Yes);
        assert_eq!(rep.degradable, Flag::No);
        assert!(matches!(
            rep.witnesses["degradable"],
            Witness::Fidelity { .. }
        ));
        assert_eq!(rep.anti_degradable, Flag::Undetermined);
    }

    #[test]
    fn thresholds() {
        let r = solve_threshold(ThresholdKind::BobLessNoisy).unwrap();
        assert!((r - 0.5424).abs() < 5e-4);
        let p = solve_threshold(ThresholdKind::EveLessNoisy).unwrap();
        assert!((p - 0.1241).abs() < 5e-4);
        let m = solve_threshold(ThresholdKind::BobMoreCapable).unwrap();
        assert!((m - 0.5342).abs() < 5e-4);
        assert_eq!(
            solve_threshold(ThresholdKind::BobDegradable).unwrap(),
            (3.0 - 5f64.sqrt()) / 2.0
        );
        // The radicals are the roots of their residuals.
        for k in [ThresholdKind::BobDegradable, ThresholdKind::EveDegradable] {
            assert!(k.residual(solve_threshold(k).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn threshold_kind_parses() {
        for k in ThresholdKind::ALL {
            assert_eq!(k.name().parse::<ThresholdKind>().unwrap(), k);
        }
        assert!("nope".parse::<ThresholdKind>().is_err());
    }

    #[test]
    fn three_points_do_not_beat_two() {
        let w = quantum_bob(0.45).unwrap();
        let two = p1_binary(&w).unwrap().p1;
        let three = ensemble_search(&w, 3, 8, 7).unwrap();
        assert!(three.value <= two + 1e-6, "{} > {}", three.value, two);
        assert!(three.value >= two - 1e-4);
    }

    #[test]
    fn non_binary_is_unsupported() {
        let three = crate::channels::embed_classical(
            &crate::channels::ClassicalChannel::new(vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.5, 0.5],
            ])
            .unwrap(),
        );
        let w = wiretap(three.clone(), three).unwrap();
        assert!(matches!(p1_binary(&w), Err(Error::Unsupported(_))));
        assert!(p0(&w).unwrap().0.abs() < 1e-9);
    }
}
