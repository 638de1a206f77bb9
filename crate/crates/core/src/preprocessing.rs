//! Classical preprocessing of channel blocks: the two-use parity encoder,
//! the repetition-plus-noise encoder, and the rates they achieve.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    digits_big_endian, quantum_bob, quantum_eve, ClassicalChannel, CqChannel, WiretapChannel,
};
use crate::entropy::{h2_unchecked, shannon_entropy, BinaryObjective};
use crate::error::{check_probability, Error, Result};
use crate::linalg::{symmetric_eigenvalues, tensor_with, DensityMatrix, HermitianMatrix};
use crate::optim::golden_max;
use crate::private_info::{envelope_values, lower_convex_hull, p1_binary};
use crate::tolerances::Tolerances;

/// Largest block length for the dense Charlie term of [`repcode_rate`].
pub const MAX_REPCODE_BLOCK: usize = 12;

/// Largest block length for which a preprocessing map is tabulated.
const MAX_MAP_BLOCK: usize = 20;

const SYMMETRY_PROBES: [f64; 5] = [0.05, 0.15, 0.25, 0.35, 0.45];
const SYMMETRY_TOL: f64 = 1e-10;
const HALF_GRID: usize = 129;
/// Grid gaps at or below this are rounding noise on a convex objective.
const FLAT_GAP: f64 = 1e-14;

/// Classical map from a logical bit to strings of `n` channel inputs.
/// String `w` is indexed big-endian: bit `i` of the block is bit `n−1−i` of `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessor {
    block_length: usize,
    map: ClassicalChannel,
}

impl Preprocessor {
    pub fn new(block_length: usize, map: ClassicalChannel) -> Result<Self> {
        if map.input_size() != 2 {
            return Err(Error::Validation(
                "preprocessor takes one logical bit".into(),
            ));
        }
        if block_length == 0
            || block_length > MAX_MAP_BLOCK
            || map.output_size() != 1 << block_length
        {
            return Err(Error::Validation(format!(
                "preprocessor rows must cover all 2^{block_length} strings"
            )));
        }
        Ok(Self { block_length, map })
    }

    pub fn identity() -> Self {
        repetition_noise_preprocessor(1, 0.0).expect("valid parameters")
    }

    pub fn logical_size(&self) -> usize {
        2
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn map(&self) -> &ClassicalChannel {
        &self.map
    }
}

/// Logical 0 goes to a uniformly random even-parity pair, logical 1 to an
/// odd-parity pair.
pub fn parity_preprocessor() -> Preprocessor {
    let map = ClassicalChannel::new(vec![vec![0.5, 0.0, 0.0, 0.5], vec![0.0, 0.5, 0.5, 0.0]])
        .expect("valid rows");
    Preprocessor {
        block_length: 2,
        map,
    }
}

/// `n`-fold repetition followed by independent bit flips with probability `q`.
pub fn repetition_noise_preprocessor(n: usize, q: f64) -> Result<Preprocessor> {
    check_probability("q", q)?;
    if n == 0 {
        return Err(Error::Validation("block length must be at least 1".into()));
    }
    if n > MAX_MAP_BLOCK {
        return Err(Error::Size {
            required: 1usize << n.min(63),
            cap: 1 << MAX_MAP_BLOCK,
        });
    }
    let all_ones = (1usize << n) - 1;
    let rows = [0usize, all_ones]
        .iter()
        .map(|&codeword| {
            (0..1usize << n)
                .map(|w| {
                    let flips = (w ^ codeword).count_ones() as i32;
                    q.powi(flips) * (1.0 - q).powi(n as i32 - flips)
                })
                .collect()
        })
        .collect();
    // Row sums are 1 up to rounding in the binomial expansion.
    Ok(Preprocessor {
        block_length: n,
        map: ClassicalChannel::new(rows)?,
    })
}

/// `W^{⊗n} ∘ P` as a binary-input wiretap channel.
pub fn compose(pre: &Preprocessor, w: &WiretapChannel) -> Result<WiretapChannel> {
    compose_with(pre, w, &Tolerances::DEFAULT)
}

pub fn compose_with(
    pre: &Preprocessor,
    w: &WiretapChannel,
    tol: &Tolerances,
) -> Result<WiretapChannel> {
    if w.input_size() != 2 {
        return Err(Error::Composition(format!(
            "preprocessors emit bits but the channel takes {} letters",
            w.input_size()
        )));
    }
    let n = pre.block_length();
    for side in [w.bob(), w.charlie()] {
        let required = (side.output_dim() as f64).powi(n as i32);
        if required > tol.dim_cap as f64 {
            return Err(Error::Size {
                required: required.min(usize::MAX as f64) as usize,
                cap: tol.dim_cap,
            });
        }
    }
    let side = |c: &CqChannel| -> Result<CqChannel> {
        let outputs = (0..2)
            .map(|x| {
                let dim = c.output_dim().pow(n as u32);
                let mut acc = HermitianMatrix::zeros(dim);
                for (word, &weight) in pre.map().row(x).iter().enumerate() {
                    if weight == 0.0 {
                        continue;
                    }
                    let bits = digits_big_endian(word, 2, n);
                    let mut prod = c.output(bits[0]).as_hermitian().clone();
                    for &b in &bits[1..] {
                        prod = tensor_with(&prod, c.output(b).as_hermitian(), tol)?;
                    }
                    acc.add_scaled(weight, &prod);
                }
                Ok(DensityMatrix::from_hermitian_unchecked(acc))
            })
            .collect::<Result<Vec<_>>>()?;
        CqChannel::new(outputs)
    };
    WiretapChannel::new(side(w.bob())?, side(w.charlie())?)
}

/// Checks `f(q) = f(1−q)` at a few probes.
fn check_symmetry(obj: &BinaryObjective) -> Result<()> {
    for q in SYMMETRY_PROBES {
        let d = (obj.value(q) - obj.value(1.0 - q)).abs();
        if d >= SYMMETRY_TOL {
            return Err(Error::Solver(format!(
                "composed objective is not symmetric: |f({q}) − f({})| = {d:e}",
                1.0 - q
            )));
        }
    }
    Ok(())
}

/// Minimizer of `f` on `[0, ½]`: grid scan (smallest q on ties), then
/// golden-section within one step.
fn min_on_half(f: &(impl Fn(f64) -> f64 + Sync)) -> (f64, f64) {
    let h = 0.5 / (HALF_GRID - 1) as f64;
    let vals: Vec<(f64, f64)> = (0..HALF_GRID)
        .into_par_iter()
        .map(|i| {
            let q = i as f64 * h;
            (q, f(q))
        })
        .collect();
    let (mut qi, mut vi) = vals[0];
    for &(q, v) in &vals[1..] {
        if v < vi {
            qi = q;
            vi = v;
        }
    }
    let (q, nv) = golden_max(|q| -f(q), (qi - h).max(0.0), (qi + h).min(0.5), 1e-12);
    if -nv < vi {
        (q, -nv)
    } else {
        (qi, vi)
    }
}

/// `P₁` of a binary-input channel whose objective is symmetric about ½.
///
/// The objective is sampled on `[0, ½]` and mirrored. When the largest
/// envelope gap sits at ½ under a flat hull segment `[q, 1−q]`, the
/// envelope at ½ is `min f` and `P₁ = f(½) − min f`, attained by the
/// ensemble `{½: q, ½: 1−q}`; only the minimum needs refining. Any other
/// shape falls back to the full envelope computation.
///
/// Returns `(P₁, q)` with `q ≤ ½` the first support point.
pub fn symmetric_p1(w: &WiretapChannel) -> Result<(f64, f64)> {
    let obj = BinaryObjective::new(w)?;
    if check_symmetry(&obj).is_ok() {
        if let Some(found) = symmetric_gap(&obj) {
            return Ok(found);
        }
    }
    let env = p1_binary(w)?;
    Ok((env.p1, env.ensemble.points[0].min(env.ensemble.points[1])))
}

fn symmetric_gap(obj: &BinaryObjective) -> Option<(f64, f64)> {
    let h = 0.5 / (HALF_GRID - 1) as f64;
    let half: Vec<f64> = (0..HALF_GRID)
        .into_par_iter()
        .map(|i| obj.value(i as f64 * h))
        .collect();
    let n = 2 * HALF_GRID - 1;
    let mid = HALF_GRID - 1;
    let grid: Vec<(f64, f64)> = (0..n)
        .map(|i| (i as f64 * h, half[if i <= mid { i } else { n - 1 - i }]))
        .collect();
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
    if best_gap <= FLAT_GAP {
        return Some((0.0, 0.5));
    }
    let seg = hull.partition_point(|&k| k < best_i).max(1) - 1;
    let (ia, ib) = (hull[seg], hull[seg + 1]);
    if best_i != mid || ia + ib != n - 1 {
        return None;
    }
    let qa = grid[ia].0;
    let (mut q, mut fmin) = (qa, grid[ia].1);
    let (qr, nv) = golden_max(
        |x| -obj.value(x),
        (qa - h).max(0.0),
        (qa + h).min(0.5),
        1e-12,
    );
    if -nv < fmin {
        q = qr;
        fmin = -nv;
    }
    Some(((half[mid] - fmin).max(0.0), q))
}

/// Rate and optimal preprocessing noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizedRate {
    /// Per channel use, in bits.
    pub rate: f64,
    pub q_star: f64,
}

/// `½ max_q [f_c(½) − f_c(q)]` where `f_c` belongs to the parity-encoded
/// quantum-Bob channel at parameter `r`.
pub fn parity_rate(r: f64) -> Result<OptimizedRate> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain("r", r, "(0, 1)"));
    }
    let composed = compose(&parity_preprocessor(), &quantum_bob(r)?)?;
    let obj = BinaryObjective::new(&composed)?;
    check_symmetry(&obj)?;
    let (q, fmin) = min_on_half(&|q| obj.value(q));
    // Gaps at rounding level are reported as an exact zero.
    let gap = obj.value(0.5) - fmin;
    Ok(OptimizedRate {
        rate: if gap > FLAT_GAP { 0.5 * gap } else { 0.0 },
        q_star: q,
    })
}

/// Terms of the repetition-code rate at uniform logical input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepRateBreakdown {
    pub p: f64,
    pub q: f64,
    pub n: usize,
    /// `1 − Σ_s p(s) H(W|S=s)`.
    pub bob_term: f64,
    /// `H(½ρ^{⊗n} + ½Z^{⊗n}ρ^{⊗n}Z^{⊗n}) − n H(ρ)`.
    pub charlie_term: f64,
    /// `(bob_term − charlie_term) / n`.
    pub rate: f64,
}

/// One syndrome class of the repetition code: `multiplicity` syndromes of
/// weight `weight`, each consistent with two error patterns of
/// probabilities `a` (logical bit intact) and `b` (logical bit flipped).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyndromeClass {
    pub weight: usize,
    pub multiplicity: u64,
    pub a: f64,
    pub b: f64,
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

fn check_repcode_args(p: f64, q: f64, n: usize) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::domain("p", p, "[0, 0.5]"));
    }
    check_probability("q", q)?;
    if n == 0 {
        return Err(Error::Validation("block length must be at least 1".into()));
    }
    if n > MAX_REPCODE_BLOCK {
        return Err(Error::Size {
            required: 1 << n.min(63),
            cap: 1 << MAX_REPCODE_BLOCK,
        });
    }
    Ok(())
}

/// Syndrome classes for effective flip probability `t̃ = q(1−p) + p(1−q)`.
pub fn syndrome_classes(p: f64, q: f64, n: usize) -> Result<Vec<SyndromeClass>> {
    check_repcode_args(p, q, n)?;
    let t = q * (1.0 - p) + p * (1.0 - q);
    Ok((0..n)
        .map(|k| SyndromeClass {
            weight: k,
            multiplicity: binomial(n - 1, k),
            a: t.powi(k as i32) * (1.0 - t).powi((n - k) as i32),
            b: t.powi((n - k) as i32) * (1.0 - t).powi(k as i32),
        })
        .collect())
}

/// Single-use Charlie state `(1−q)|φ₊⟩⟨φ₊| + q|φ₋⟩⟨φ₋|` with
/// `|φ±⟩ = √(1−p)|0⟩ ± √p|1⟩`.
pub fn rho_pq(p: f64, q: f64) -> Result<DensityMatrix> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::domain("p", p, "[0, 0.5]"));
    }
    check_probability("q", q)?;
    let off = (1.0 - 2.0 * q) * (p * (1.0 - p)).sqrt();
    Ok(DensityMatrix::from_hermitian_unchecked(
        HermitianMatrix::from_real_rows(&[vec![1.0 - p, off], vec![off, p]])?,
    ))
}

/// Entropy of `½ρ^{⊗n} + ½Z^{⊗n}ρ^{⊗n}Z^{⊗n}` for a real qubit state `ρ`.
///
/// Both `ρ^{⊗n}` and the parity operator `Z^{⊗n}` respect the split of
/// `(C²)^{⊗n}` into spin sectors: the sector with `s` singlet pairs carries
/// `Sym^{n−2s}(ρ) · det(ρ)^s` with multiplicity `C(n,s) − C(n,s−1)`, and the
/// twirl keeps the entries of `Sym^k(ρ)` between Dicke states whose
/// excitation numbers have equal parity. Every block is at most
/// `(n+1)/2`-dimensional.
fn twirled_power_entropy(rho: [[f64; 2]; 2], n: usize) -> f64 {
    let det = rho[0][0] * rho[1][1] - rho[0][1] * rho[1][0];
    let mut total = 0.0;
    for s in 0..=n / 2 {
        let k = n - 2 * s;
        let mult = binomial(n, s) - if s > 0 { binomial(n, s - 1) } else { 0 };
        let sym = symmetric_power(rho, k);
        let scale = det.max(0.0).powi(s as i32);
        for parity in 0..2 {
            let idx: Vec<usize> = (0..=k).filter(|a| a % 2 == parity).collect();
            let m = idx.len();
            if m == 0 {
                continue;
            }
            let mut block = vec![0.0; m * m];
            for (x, &c) in idx.iter().enumerate() {
                for (y, &a) in idx.iter().enumerate() {
                    block[x * m + y] = 0.5 * (sym[c][a] + sym[a][c]);
                }
            }
            let spectrum: Vec<f64> = symmetric_eigenvalues(block, m)
                .into_iter()
                .map(|l| l * scale)
                .collect();
            total += mult as f64
                * crate::entropy::entropy_of_spectrum(
                    &spectrum,
                    Tolerances::DEFAULT.eigenvalue_clip,
                );
        }
    }
    total
}

/// `Sym^k(M)` in the orthonormal Dicke basis `|D_0⟩, …, |D_k⟩`.
fn symmetric_power(m: [[f64; 2]; 2], k: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; k + 1]; k + 1];
    for a in 0..=k {
        // (M e₀)^{k−a} (M e₁)^a expanded in powers of e₁.
        let u: Vec<f64> = (0..=k - a)
            .map(|i| {
                binomial(k - a, i) as f64
                    * m[1][0].powi(i as i32)
                    * m[0][0].powi((k - a - i) as i32)
            })
            .collect();
        let v: Vec<f64> = (0..=a)
            .map(|j| binomial(a, j) as f64 * m[1][1].powi(j as i32) * m[0][1].powi((a - j) as i32))
            .collect();
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                out[i + j][a] += ui * vj;
            }
        }
    }
    for (c, row) in out.iter_mut().enumerate() {
        for (a, x) in row.iter_mut().enumerate() {
            *x *= (binomial(k, a) as f64 / binomial(k, c) as f64).sqrt();
        }
    }
    out
}

/// Repetition-code rate at uniform logical input, with its Bob and Charlie
/// terms.
pub fn repcode_rate(p: f64, q: f64, n: usize) -> Result<RepRateBreakdown> {
    let classes = syndrome_classes(p, q, n)?;
    let bob_term = 1.0
        - classes
            .iter()
            .map(|c| {
                let s = c.a + c.b;
                if s > 0.0 {
                    c.multiplicity as f64 * s * h2_unchecked(c.a / s)
                } else {
                    0.0
                }
            })
            .sum::<f64>();
    let rho = rho_pq(p, q)?;
    let r = |i, j| rho.as_hermitian().get(i, j).re;
    let single = shannon_entropy(&rho.eigenvalues());
    let charlie_term =
        twirled_power_entropy([[r(0, 0), r(0, 1)], [r(1, 0), r(1, 1)]], n) - n as f64 * single;
    Ok(RepRateBreakdown {
        p,
        q,
        n,
        bob_term,
        charlie_term,
        rate: (bob_term - charlie_term) / n as f64,
    })
}

/// `P₁(W^{⊗n} ∘ P[q]) / n` for the repetition-plus-noise encoder on the
/// quantum-Eve family.
pub fn repetition_p1_rate(p: f64, q: f64, n: usize) -> Result<f64> {
    check_repcode_args(p, q, n)?;
    let composed = compose(&repetition_noise_preprocessor(n, q)?, &quantum_eve(p)?)?;
    Ok(symmetric_p1(&composed)?.0 / n as f64)
}

/// Step of the coarse grid over the preprocessing noise.
pub const NOISE_GRID_STEP: f64 = 0.005;

/// `max_q P₁(W^{⊗n} ∘ P[q]) / n`: coarse grid over `q ∈ [0, ½]`, then
/// golden-section refinement to `1e-6`.
pub fn repetition_optimal_rate(p: f64, n: usize) -> Result<OptimizedRate> {
    check_repcode_args(p, 0.0, n)?;
    maximize_over_noise(|q| repetition_p1_rate(p, q, n))
}

/// `max_q repcode_rate(p, q, n).rate`, searched like
/// [`repetition_optimal_rate`]. Cheap for every admissible `n`.
pub fn repcode_optimal_rate(p: f64, n: usize) -> Result<OptimizedRate> {
    check_repcode_args(p, 0.0, n)?;
    maximize_over_noise(|q| repcode_rate(p, q, n).map(|b| b.rate))
}

fn maximize_over_noise(rate: impl Fn(f64) -> Result<f64> + Sync) -> Result<OptimizedRate> {
    let steps = (0.5 / NOISE_GRID_STEP).round() as usize;
    let coarse = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let q = i as f64 * NOISE_GRID_STEP;
            rate(q).map(|v| (q, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut qb, mut vb) = coarse[0];
    for &(q, v) in &coarse[1..] {
        if v > vb {
            qb = q;
            vb = v;
        }
    }
    if vb <= 0.0 {
        return Ok(OptimizedRate {
            rate: 0.0,
            q_star: qb,
        });
    }
    let (q, v) = golden_max(
        |q| rate(q).unwrap_or(f64::NEG_INFINITY),
        (qb - NOISE_GRID_STEP).max(0.0),
        (qb + NOISE_GRID_STEP).min(0.5),
        1e-6,
    );
    Ok(if v > vb {
        OptimizedRate { rate: v, q_star: q }
    } else {
        OptimizedRate {
            rate: vb,
            q_star: qb,
        }
    })
}

/// Rate curves of the two named families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveFamily {
    /// `P₁` of the quantum-Bob family.
    BobN1,
    /// Half the two-use parity rate of the quantum-Bob family.
    BobN2Parity,
    /// `P₁` of the quantum-Eve family.
    EveN1,
    /// Best three-use repetition rate of the quantum-Eve family.
    EveN3Rep,
}

impl CurveFamily {
    pub const ALL: [CurveFamily; 4] = [
        CurveFamily::BobN1,
        CurveFamily::BobN2Parity,
        CurveFamily::EveN1,
        CurveFamily::EveN3Rep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CurveFamily::BobN1 => "bob_n1",
            CurveFamily::BobN2Parity => "bob_n2_parity",
            CurveFamily::EveN1 => "eve_n1",
            CurveFamily::EveN3Rep => "eve_n3_rep",
        }
    }

    /// Rate at one parameter value.
    pub fn point(self, x: f64) -> Result<CurvePoint> {
        let (rate, q_star) = match self {
            CurveFamily::BobN1 => (p1_binary(&quantum_bob(x)?)?.p1, None),
            CurveFamily::EveN1 => (p1_binary(&quantum_eve(x)?)?.p1, None),
            CurveFamily::BobN2Parity => {
                let r = parity_rate(x)?;
                (r.rate, Some(r.q_star))
            }
            CurveFamily::EveN3Rep => {
                let r = repetition_optimal_rate(x, 3)?;
                (r.rate, Some(r.q_star))
            }
        };
        Ok(CurvePoint { x, rate, q_star })
    }
}

impl fmt::Display for CurveFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurveFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown curve family {s:?}")))
    }
}

/// One sample of a rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub rate: f64,
    /// Optimal preprocessing noise, for the preprocessed families.
    pub q_star: Option<f64>,
}

/// Evaluates `family` on every grid value, in parallel, in grid order.
pub fn rate_curve(family: CurveFamily, grid: &[f64]) -> Result<Vec<CurvePoint>> {
    if let Some(&bad) = grid.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::domain("curve parameter", bad, "(0, 1)"));
    }
    grid.par_iter().map(|&x| family.point(x)).collect()
}

/// `start, start + step, …` up to `end` (inclusive within half a step).
pub fn parameter_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(end >= start) {
        return Err(Error::Validation(format!(
            "bad range {start}:{end} with step {step}"
        )));
    }
    let count = ((end - start) / step + 0.5).floor() as usize;
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

/// Where the curve stops being positive: linear interpolation between the
/// last point with `rate > zero_band` and its successor. `None` when the
/// curve never rises above the band or never comes back down.
pub fn zero_crossing(points: &[CurvePoint], zero_band: f64) -> Option<f64> {
    let last = points.iter().rposition(|p| p.rate > zero_band)?;
    let next = points.get(last + 1)?;
    let a = &points[last];
    let t = a.rate / (a.rate - next.rate);
    Some(a.x + t.clamp(0.0, 1.0) * (next.x - a.x))
}

/// Writes `x y` lines with shortest round-trip formatting.
pub fn write_dat(mut out: impl Write, points: &[CurvePoint]) -> std::io::Result<()> {
    for p in points {
        writeln!(out, "{} {}", p.x, p.rate)?;
    }
    Ok(())
}

/// Parses `x y` lines.
pub fn parse_dat(text: &str) -> Result<Vec<(f64, f64)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => Ok((x, y)),
                _ => Err(Error::Parse {
                    line: i + 1,
                    column: 1,
                    message: format!("expected two numbers, got {line:?}"),
                }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense oracle: entropy of the twirled power by brute force. The
    /// twirl removes every entry `(i, j)` with odd `|i| + |j|`, so the state
    /// splits into even- and odd-weight blocks.
    fn dense_twirled_power_entropy(rho: [[f64; 2]; 2], n: usize) -> f64 {
        let mut spectrum = Vec::with_capacity(1 << n);
        for parity in 0..2u32 {
            let idx: Vec<usize> = (0..1usize << n)
                .filter(|i| i.count_ones() % 2 == parity)
                .collect();
            let m = idx.len();
            let mut block = vec![0.0; m * m];
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    let mut v = 1.0;
                    for bit in 0..n {
                        v *= rho[(i >> bit) & 1][(j >> bit) & 1];
                    }
                    block[a * m + b] = v;
                }
            }
            spectrum.extend(symmetric_eigenvalues(block, m));
        }
        crate::entropy::entropy_of_spectrum(&spectrum, Tolerances::DEFAULT.eigenvalue_clip)
    }

    #[test]
    fn uniform_optimum_is_below_envelope_optimum() {
        for p in [0.11, 0.12, 0.124] {
            let uniform = repcode_optimal_rate(p, 3).unwrap();
            let envelope = repetition_optimal_rate(p, 3).unwrap();
            assert!(uniform.rate <= envelope.rate + 1e-12, "p={p}");
            let at = repcode_rate(p, uniform.q_star, 3).unwrap().rate;
            assert!((at.max(0.0) - uniform.rate).abs() < 1e-15);
        }
        assert!(repcode_optimal_rate(0.1, 12).unwrap().rate > 0.0);
    }

    #[test]
    fn sector_decomposition_matches_dense_twirl() {
        for (p, q) in [
            (0.1, 0.0),
            (0.124, 0.3),
            (0.3, 0.45),
            (0.0, 0.2),
            (0.5, 0.1),
        ] {
            let rho = rho_pq(p, q).unwrap();
            let h = rho.as_hermitian();
            let r = [
                [h.get(0, 0).re, h.get(0, 1).re],
                [h.get(1, 0).re, h.get(1, 1).re],
            ];
            for n in 1..=8 {
                let fast = twirled_power_entropy(r, n);
                let dense = dense_twirled_power_entropy(r, n);
                assert!(
                    (fast - dense).abs() < 1e-10,
                    "p={p} q={q} n={n}: {fast} vs {dense}"
                );
            }
        }
    }

    use crate::channels::InputDistribution;
    use crate::entropy::{f_w, h2};

    #[test]
    fn parity_rows() {
        let pre = parity_preprocessor();
        assert_eq!(pre.map().row(0), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(pre.map().row(1), &[0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn repetition_rows() {
        let id = repetition_noise_preprocessor(1, 0.0).unwrap();
        assert_eq!(id.map().rows(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let r3 = repetition_noise_preprocessor(3, 0.0).unwrap();
        assert_eq!(r3.map().row(0)[0], 1.0);
        assert_eq!(r3.map().row(1)[7], 1.0);
        let r2 = repetition_noise_preprocessor(2, 0.1).unwrap();
        let expect = [0.81, 0.09, 0.09, 0.01];
        for (a, b) in r2.map().row(0).iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_composition_is_the_channel() {
        let w = quantum_bob(0.4).unwrap();
        let c = compose(&Preprocessor::identity(), &w).unwrap();
        for x in 0..2 {
            assert!(
                c.bob()
                    .output(x)
                    .as_hermitian()
                    .max_abs_diff(w.bob().output(x).as_hermitian())
                    < 1e-15
            );
            assert!(
                c.charlie()
                    .output(x)
                    .as_hermitian()
                    .max_abs_diff(w.charlie().output(x).as_hermitian())
                    < 1e-15
            );
        }
    }

    #[test]
    fn parity_bob_output_has_rank_two() {
        let c = compose(&parity_preprocessor(), &quantum_bob(0.5).unwrap()).unwrap();
        let ev = c.bob().output(0).eigenvalues();
        assert_eq!(ev.iter().filter(|&&v| v > 1e-10).count(), 2);
    }

    #[test]
    fn compose_reports_size() {
        let tol = Tolerances {
            dim_cap: 8,
            ..Tolerances::DEFAULT
        };
        let err = compose_with(
            &repetition_noise_preprocessor(3, 0.1).unwrap(),
            &quantum_bob(0.5).unwrap(),
            &tol,
        );
        assert!(matches!(
            err,
            Err(Error::Size {
                required: 27,
                cap: 8
            })
        ));
    }

    #[test]
    fn parity_rate_spot_value() {
        let r = parity_rate(0.543).unwrap();
        assert!(r.rate > 2e-4 && r.rate < 4e-4, "{r:?}");
        assert!((r.q_star - 0.2281).abs() < 5e-3, "{r:?}");
        assert!(parity_rate(0.55).unwrap().rate <= 1e-6);
    }

    #[test]
    fn parity_rate_matches_composed_envelope() {
        for r in [0.52, 0.543] {
            let composed = compose(&parity_preprocessor(), &quantum_bob(r).unwrap()).unwrap();
            let env = p1_binary(&composed).unwrap().p1;
            assert!((2.0 * parity_rate(r).unwrap().rate - env).abs() < 1e-8);
        }
    }

    #[test]
    fn repcode_single_use_is_the_bare_channel() {
        let b = repcode_rate(0.1, 0.0, 1).unwrap();
        assert!((b.rate - (1.0 - 2.0 * h2(0.1).unwrap())).abs() < 1e-12);
        assert!((b.rate - 0.062_008_8).abs() < 1e-6);
    }

    #[test]
    fn repcode_matches_dense_uniform_evaluation() {
        for (p, q, n) in [(0.1, 0.2, 2), (0.12, 0.3, 3), (0.2, 0.05, 4)] {
            let b = repcode_rate(p, q, n).unwrap();
            let composed = compose(
                &repetition_noise_preprocessor(n, q).unwrap(),
                &quantum_eve(p).unwrap(),
            )
            .unwrap();
            let dense = f_w(&composed, &InputDistribution::uniform(2)).unwrap() / n as f64;
            assert!(
                (b.rate - dense).abs() < 1e-9,
                "{p} {q} {n}: {} vs {dense}",
                b.rate
            );
            assert!(b.rate <= repetition_p1_rate(p, q, n).unwrap() + 1e-8);
        }
    }

    #[test]
    fn repcode_useless_bob() {
        for n in 1..=4 {
            for q in [0.0, 0.2, 0.5] {
                assert!(repcode_rate(0.5, q, n).unwrap().rate <= 1e-9);
            }
        }
    }

    #[test]
    fn repcode_caps_block_length() {
        assert!(matches!(
            repcode_rate(0.1, 0.1, 13),
            Err(Error::Size { .. })
        ));
        assert!(repcode_rate(0.0, 0.2, 3).is_ok());
    }

    #[test]
    fn syndrome_normalization() {
        for n in 1..=MAX_REPCODE_BLOCK {
            for (p, q) in [(0.01, 0.0), (0.1, 0.3), (0.3, 0.9)] {
                let total: f64 = syndrome_classes(p, q, n)
                    .unwrap()
                    .iter()
                    .map(|c| c.multiplicity as f64 * (c.a + c.b))
                    .sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn curve_family_names_round_trip() {
        for f in CurveFamily::ALL {
            assert_eq!(f.name().parse::<CurveFamily>().unwrap(), f);
        }
    }

    #[test]
    fn grid_and_crossing() {
        let g = parameter_grid(0.52, 0.55, 0.01).unwrap();
        assert_eq!(g.len(), 4);
        let pts: Vec<CurvePoint> = [(0.1, 2.0), (0.2, 1.0), (0.3, 0.0)]
            .iter()
            .map(|&(x, rate)| CurvePoint {
                x,
                rate,
                q_star: None,
            })
            .collect();
        assert!((zero_crossing(&pts, 1e-9).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn dat_round_trip() {
        let pts = vec![
            CurvePoint {
                x: 0.1 + 0.2,
                rate: 1.0 / 3.0,
                q_star: None,
            },
            CurvePoint {
                x: 0.5,
                rate: 1e-300,
                q_star: None,
            },
        ];
        let mut buf = Vec::new();
        write_dat(&mut buf, &pts).unwrap();
        let back = parse_dat(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, vec![(0.1 + 0.2, 1.0 / 3.0), (0.5, 1e-300)]);
        assert!(parse_dat("1 2 3").is_err());
    }
}
