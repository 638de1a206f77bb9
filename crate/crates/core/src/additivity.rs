//! Quantum-input private information of qcc channels (quantum input,
//! classical outputs to both receivers) and a numerical probe of its
//! additivity under tensor products.
//!
//! The search maximizes `I(V:Y) − I(V:Z)` over explicit ensembles, so every
//! reported value is achieved by the returned ensemble and is a certified
//! lower bound on `P₁`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::ClassicalChannel;
use crate::entropy::shannon_entropy;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_with, eigh, tensor_with, DensityMatrix, HermitianMatrix, C64};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::random::{gaussian_matrix, gram};
use crate::tolerances::Tolerances;

/// Gaps above this are flagged by [`additivity_probe`].
pub const ANOMALY_TOLERANCE: f64 = 1e-4;

/// Quantum-to-classical channel with outputs `(y, z)`; Bob sees `y`,
/// Charlie sees `z`. Element `(y, z)` is stored at `y · z_size + z`.
#[derive(Debug, Clone, PartialEq)]
pub struct QccChannel {
    input_dim: usize,
    y_size: usize,
    z_size: usize,
    povm: Vec<HermitianMatrix>,
}

impl QccChannel {
    pub fn new(
        input_dim: usize,
        y_size: usize,
        z_size: usize,
        povm: Vec<HermitianMatrix>,
    ) -> Result<Self> {
        Self::with_tolerances(input_dim, y_size, z_size, povm, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(
        input_dim: usize,
        y_size: usize,
        z_size: usize,
        povm: Vec<HermitianMatrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if y_size == 0 || z_size == 0 || povm.len() != y_size * z_size {
            return Err(Error::Validation(format!(
                "POVM has {} elements, expected {y_size} × {z_size}",
                povm.len()
            )));
        }
        if povm.iter().any(|e| e.dim() != input_dim) {
            return Err(Error::Validation(
                "POVM elements do not act on the input".into(),
            ));
        }
        let mut total = HermitianMatrix::zeros(input_dim);
        for (k, e) in povm.iter().enumerate() {
            let min = eigenvalues_with(e, tol).last().copied().unwrap_or(0.0);
            if min < -tol.psd {
                return Err(Error::Validation(format!(
                    "POVM element {k} has eigenvalue {min:e} < 0"
                )));
            }
            total.add_scaled(1.0, e);
        }
        let dev = total.max_abs_diff(&HermitianMatrix::identity(input_dim));
        if dev > tol.psd {
            return Err(Error::Validation(format!(
                "POVM elements sum to the identity only within {dev:e}"
            )));
        }
        Ok(Self {
            input_dim,
            y_size,
            z_size,
            povm,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn element(&self, y: usize, z: usize) -> &HermitianMatrix {
        &self.povm[y * self.z_size + z]
    }

    /// Measures in the computational basis, then sends the outcome through
    /// `bob` to Y and, independently, through `charlie` to Z.
    pub fn basis_measurement(bob: &ClassicalChannel, charlie: &ClassicalChannel) -> Result<Self> {
        if bob.input_size() != charlie.input_size() {
            return Err(Error::Composition(
                "Bob and Charlie take different alphabets".into(),
            ));
        }
        let d = bob.input_size();
        let mut povm = Vec::with_capacity(bob.output_size() * charlie.output_size());
        for y in 0..bob.output_size() {
            for z in 0..charlie.output_size() {
                let diag: Vec<f64> = (0..d).map(|x| bob.row(x)[y] * charlie.row(x)[z]).collect();
                povm.push(HermitianMatrix::from_real_diagonal(&diag));
            }
        }
        Self::new(d, bob.output_size(), charlie.output_size(), povm)
    }

    /// Outcome `(y, z)` is drawn from `joint` regardless of the input.
    pub fn input_ignoring(input_dim: usize, joint: &[Vec<f64>]) -> Result<Self> {
        let y_size = joint.len();
        let z_size = joint.first().map_or(0, Vec::len);
        let povm = joint
            .iter()
            .flat_map(|row| {
                row.iter()
                    .map(|&p| HermitianMatrix::identity(input_dim).scaled(p))
            })
            .collect();
        Self::new(input_dim, y_size, z_size, povm)
    }

    /// Random channel: `k = 4` Gaussian matrices `G_i`, elements
    /// `S^{-1/2} G_i G_i† S^{-1/2}` with `S = Σ G_i G_i†`, arranged as a
    /// 2 × 2 grid of `(y, z)` outcomes.
    pub fn random(rng: &mut impl Rng, input_dim: usize) -> Self {
        let grams: Vec<HermitianMatrix> = (0..4)
            .map(|_| {
                gram(
                    &gaussian_matrix(rng, input_dim, input_dim),
                    input_dim,
                    input_dim,
                )
            })
            .collect();
        let mut s = HermitianMatrix::zeros(input_dim);
        for g in &grams {
            s.add_scaled(1.0, g);
        }
        let inv_sqrt = eigh(&s).apply(|l| if l > 0.0 { 1.0 / l.sqrt() } else { 0.0 });
        let povm = grams
            .iter()
            .map(|g| g.conjugated_by(inv_sqrt.entries()).expect("same dimension"))
            .collect();
        Self::new(input_dim, 2, 2, povm).expect("normalized by construction")
    }

    /// `W₁ ⊗ W₂`: Bob receives `(y₁, y₂)` and Charlie `(z₁, z₂)`.
    pub fn tensor(&self, other: &QccChannel) -> Result<Self> {
        let tol = Tolerances::DEFAULT;
        let (ys, zs) = (self.y_size * other.y_size, self.z_size * other.z_size);
        let mut povm = Vec::with_capacity(ys * zs);
        for y1 in 0..self.y_size {
            for y2 in 0..other.y_size {
                for z1 in 0..self.z_size {
                    for z2 in 0..other.z_size {
                        povm.push(tensor_with(
                            self.element(y1, z1),
                            other.element(y2, z2),
                            &tol,
                        )?);
                    }
                }
            }
        }
        Self::new(self.input_dim * other.input_dim, ys, zs, povm)
    }

    /// The same channel after the input is rotated by `u`: elements become
    /// `U Λ U†`.
    pub fn conjugated_by(&self, u: &[C64]) -> Result<Self> {
        let povm = self
            .povm
            .iter()
            .map(|e| e.conjugated_by(u))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.input_dim, self.y_size, self.z_size, povm)
    }

    /// Outcome distribution `p(y, z) = Tr[Λ^{yz} ρ]`, flattened like the POVM.
    fn outcome_distribution(&self, rho: &HermitianMatrix) -> Vec<f64> {
        self.povm
            .iter()
            .map(|e| e.trace_product(rho).max(0.0))
            .collect()
    }

    fn check_state(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.input_dim {
            return Err(Error::Validation(format!(
                "state has dimension {}, channel input has {}",
                rho.dim(),
                self.input_dim
            )));
        }
        Ok(())
    }
}

/// `I(V:Y) − I(V:Z)` from the rows `p(v, ·, ·)` of a joint table.
fn private_gap(rows: &[Vec<f64>], y_size: usize, z_size: usize) -> f64 {
    let mut py = vec![0.0; y_size];
    let mut pz = vec![0.0; z_size];
    let mut h_vy = 0.0;
    let mut h_vz = 0.0;
    for row in rows {
        let mut ry = vec![0.0; y_size];
        let mut rz = vec![0.0; z_size];
        for y in 0..y_size {
            for z in 0..z_size {
                let p = row[y * z_size + z];
                ry[y] += p;
                rz[z] += p;
            }
        }
        for y in 0..y_size {
            py[y] += ry[y];
        }
        for z in 0..z_size {
            pz[z] += rz[z];
        }
        h_vy += shannon_entropy(&ry);
        h_vz += shannon_entropy(&rz);
    }
    // I(V:Y) − I(V:Z) = [H(Y) − H(VY)] − [H(Z) − H(VZ)]
    shannon_entropy(&py) - h_vy - shannon_entropy(&pz) + h_vz
}

/// `I(X:Y) − I(X:Z)` with `X` the eigenbasis of `ρ`: `p(x, y, z) = λ_x ⟨x|Λ^{yz}|x⟩`.
///
/// Degenerate spectra have no unique eigenbasis; the basis returned by the
/// eigensolver is used, which still describes a valid classical ensemble.
pub fn f_qcc(ch: &QccChannel, rho: &DensityMatrix) -> Result<f64> {
    ch.check_state(rho)?;
    let e = eigh(rho.as_hermitian());
    let rows: Vec<Vec<f64>> = e
        .values
        .iter()
        .zip(&e.vectors)
        .filter(|(l, _)| **l > Tolerances::DEFAULT.eigenvalue_clip)
        .map(|(&l, v)| {
            ch.povm
                .iter()
                .map(|el| l * el.expectation(v).max(0.0))
                .collect()
        })
        .collect();
    Ok(private_gap(&rows, ch.y_size, ch.z_size))
}

/// `count` random channels on `input_dim` from one seeded stream, as used by
/// the probe's regression runs.
pub fn random_channels(seed: u64, count: usize, input_dim: usize) -> Vec<QccChannel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| QccChannel::random(&mut rng, input_dim))
        .collect()
}

/// Weighted list of input states.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumEnsemble {
    weights: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl QuantumEnsemble {
    /// At most `d²` states of one dimension `d`, with probability weights.
    pub fn new(weights: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::Validation(
                "ensemble needs one weight per state".into(),
            ));
        }
        let d = states[0].dim();
        if states.iter().any(|s| s.dim() != d) {
            return Err(Error::Validation(
                "ensemble states differ in dimension".into(),
            ));
        }
        if states.len() > d * d {
            return Err(Error::Validation(format!(
                "{} states exceed the cardinality bound {}",
                states.len(),
                d * d
            )));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| !(w >= 0.0))
            || (total - 1.0).abs() > Tolerances::DEFAULT.probability
        {
            return Err(Error::Validation(
                "ensemble weights are not a probability vector".into(),
            ));
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn average(&self) -> DensityMatrix {
        let refs: Vec<&DensityMatrix> = self.states.iter().collect();
        DensityMatrix::mixture_unchecked(&self.weights, &refs)
    }

    /// Product ensemble `{w_i w'_j, ρ_i ⊗ ρ'_j}`.
    pub fn product(&self, other: &QuantumEnsemble) -> Result<Self> {
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for (wa, a) in self.weights.iter().zip(&self.states) {
            for (wb, b) in other.weights.iter().zip(&other.states) {
                weights.push(wa * wb);
                states.push(a.tensor(b)?);
            }
        }
        Self::new(weights, states)
    }
}

/// `I(V:Y) − I(V:Z)` for the ensemble fed into `ch`.
pub fn ensemble_value(ch: &QccChannel, ensemble: &QuantumEnsemble) -> Result<f64> {
    for s in ensemble.states() {
        ch.check_state(s)?;
    }
    let rows: Vec<Vec<f64>> = ensemble
        .weights
        .iter()
        .zip(&ensemble.states)
        .map(|(&w, s)| {
            ch.outcome_distribution(s.as_hermitian())
                .into_iter()
                .map(|p| w * p)
                .collect()
        })
        .collect();
    Ok(private_gap(&rows, ch.y_size, ch.z_size))
}

/// How ensemble states are parameterized during the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFamily {
    /// Any state: Bloch ball for qubits, `A A† / Tr` otherwise.
    General,
    /// States diagonal in the computational basis.
    Diagonal,
}

/// Settings for [`p1_qcc_lower_with`].
#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Nelder–Mead iterations per round.
    pub iterations: usize,
    /// Stop a round once the simplex is this small.
    pub tolerance: f64,
    /// Extra rounds restarted from each round's best point.
    pub polish_rounds: usize,
    /// Number of ensemble states; defaults to `d²`.
    pub support: Option<usize>,
    pub family: StateFamily,
    /// Ensembles tried as deterministic starting points before the random
    /// restarts.
    pub starts: Vec<QuantumEnsemble>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            iterations: 2000,
            tolerance: 1e-9,
            polish_rounds: 3,
            support: None,
            family: StateFamily::General,
            starts: Vec::new(),
        }
    }
}

/// Maps real parameter vectors to ensembles.
struct Codec {
    dim: usize,
    support: usize,
    family: StateFamily,
}

impl Codec {
    fn per_state(&self) -> usize {
        match (self.family, self.dim) {
            (StateFamily::Diagonal, d) => d,
            (StateFamily::General, 2) => 3,
            (StateFamily::General, d) => 2 * d * d,
        }
    }

    fn len(&self) -> usize {
        self.support * (self.per_state() + 1)
    }

    fn weights(&self, theta: &[f64]) -> Vec<f64> {
        let logits = &theta[self.support * self.per_state()..];
        let mx = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|t| (t - mx).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| v / s).collect()
    }

    fn state(&self, p: &[f64]) -> HermitianMatrix {
        let d = self.dim;
        match (self.family, d) {
            (StateFamily::Diagonal, _) => {
                let mx = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = p.iter().map(|t| (t - mx).exp()).collect();
                let s: f64 = e.iter().sum();
                HermitianMatrix::from_real_diagonal(&e.iter().map(|v| v / s).collect::<Vec<_>>())
            }
            (StateFamily::General, 2) => {
                let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                let scale = if norm > 0.0 { norm.tanh() / norm } else { 0.0 };
                let (x, y, z) = (p[0] * scale, p[1] * scale, p[2] * scale);
                HermitianMatrix::from_raw(
                    2,
                    vec![
                        C64::new(0.5 * (1.0 + z), 0.0),
                        C64::new(0.5 * x, -0.5 * y),
                        C64::new(0.5 * x, 0.5 * y),
                        C64::new(0.5 * (1.0 - z), 0.0),
                    ],
                )
            }
            (StateFamily::General, _) => {
                let a: Vec<C64> = p.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
                let g = gram(&a, d, d);
                let tr = g.trace();
                if tr > 0.0 {
                    g.scaled(1.0 / tr)
                } else {
                    HermitianMatrix::identity(d).scaled(1.0 / d as f64)
                }
            }
        }
    }

    fn decode(&self, theta: &[f64]) -> (Vec<f64>, Vec<HermitianMatrix>) {
        let k = self.per_state();
        let states = (0..self.support)
            .map(|i| self.state(&theta[i * k..(i + 1) * k]))
            .collect();
        (self.weights(theta), states)
    }

    /// Parameters reproducing `e` (padded with zero-weight copies when `e`
    /// has fewer states than the support).
    fn encode(&self, e: &QuantumEnsemble) -> Option<Vec<f64>> {
        if e.states().len() > self.support || e.states()[0].dim() != self.dim {
            return None;
        }
        let k = self.per_state();
        let mut theta = vec![0.0; self.len()];
        for i in 0..self.support {
            let (s, w) = match e.states().get(i) {
                Some(s) => (s, e.weights()[i]),
                None => (&e.states()[0], 0.0),
            };
            let h = s.as_hermitian();
            let slot = &mut theta[i * k..(i + 1) * k];
            match (self.family, self.dim) {
                (StateFamily::Diagonal, d) => {
                    if !h.is_diagonal() {
                        return None;
                    }
                    for j in 0..d {
                        slot[j] = h.get(j, j).re.max(1e-300).ln();
                    }
                }
                (StateFamily::General, 2) => {
                    let r = [
                        2.0 * h.get(1, 0).re,
                        2.0 * h.get(1, 0).im,
                        h.get(0, 0).re - h.get(1, 1).re,
                    ];
                    let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
                    let scale = if len > 0.0 {
                        len.min(1.0 - 1e-15).atanh() / len
                    } else {
                        0.0
                    };
                    for j in 0..3 {
                        slot[j] = r[j] * scale;
                    }
                }
                (StateFamily::General, d) => {
                    let root = eigh(h).apply(|l| l.max(0.0).sqrt());
                    for (j, z) in root.entries().iter().enumerate().take(d * d) {
                        slot[2 * j] = z.re;
                        slot[2 * j + 1] = z.im;
                    }
                }
            }
            theta[self.support * k + i] = w.max(1e-300).ln().max(-700.0);
        }
        Some(theta)
    }

    fn random(&self, rng: &mut impl Rng) -> Vec<f64> {
        (0..self.len())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect()
    }
}

/// Allocation-free evaluation of the search objective. POVM elements and
/// states are stored as interleaved `(re, im)` entries so `Tr[Λρ]` is a real
/// dot product.
struct Evaluator<'a> {
    codec: &'a Codec,
    y_size: usize,
    z_size: usize,
    povm: Vec<Vec<f64>>,
    rho: Vec<f64>,
    packed: Vec<f64>,
    joint: Vec<f64>,
    py: Vec<f64>,
    pz: Vec<f64>,
    ry: Vec<f64>,
    rz: Vec<f64>,
}

// Hermitian matrices packed into d² reals (diagonal, then doubled real and
// imaginary parts above it) so that Tr[Λρ] is a plain dot product.
fn pack(m: &[C64], d: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(d * d);
    out.extend((0..d).map(|i| m[i * d + i].re));
    for i in 0..d {
        for j in i + 1..d {
            out.push(2.0 * m[i * d + j].re);
            out.push(2.0 * m[i * d + j].im);
        }
    }
    out
}

fn pack_interleaved(m: &[f64], d: usize, out: &mut [f64]) {
    for i in 0..d {
        out[i] = m[2 * (i * d + i)];
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            out[k] = m[2 * (i * d + j)];
            out[k + 1] = m[2 * (i * d + j) + 1];
            k += 2;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

impl<'a> Evaluator<'a> {
    fn new(ch: &QccChannel, codec: &'a Codec) -> Self {
        let d = ch.input_dim;
        let povm = ch.povm.iter().map(|e| pack(e.entries(), d)).collect();
        Self {
            codec,
            y_size: ch.y_size,
            z_size: ch.z_size,
            povm,
            rho: vec![0.0; 2 * d * d],
            packed: vec![0.0; d * d],
            joint: vec![0.0; codec.support * ch.povm.len()],
            py: vec![0.0; ch.y_size],
            pz: vec![0.0; ch.z_size],
            ry: vec![0.0; ch.y_size],
            rz: vec![0.0; ch.z_size],
        }
    }

    /// Writes the state encoded by `p` into `self.rho`.
    fn load_state(&mut self, p: &[f64]) {
        let d = self.codec.dim;
        let rho = &mut self.rho;
        rho.iter_mut().for_each(|v| *v = 0.0);
        match (self.codec.family, d) {
            (StateFamily::Diagonal, _) => {
                let mx = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = p.iter().map(|t| (t - mx).exp()).sum();
                for (j, t) in p.iter().enumerate() {
                    rho[2 * (j * d + j)] = (t - mx).exp() / s;
                }
            }
            (StateFamily::General, 2) => {
                let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                let scale = if norm > 0.0 { norm.tanh() / norm } else { 0.0 };
                let (x, y, z) = (p[0] * scale, p[1] * scale, p[2] * scale);
                rho.copy_from_slice(&[
                    0.5 * (1.0 + z),
                    0.0,
                    0.5 * x,
                    -0.5 * y,
                    0.5 * x,
                    0.5 * y,
                    0.5 * (1.0 - z),
                    0.0,
                ]);
            }
            (StateFamily::General, _) => {
                let mut tr = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        let (mut re, mut im) = (0.0, 0.0);
                        for l in 0..d {
                            let (ar, ai) = (p[2 * (i * d + l)], p[2 * (i * d + l) + 1]);
                            let (br, bi) = (p[2 * (j * d + l)], p[2 * (j * d + l) + 1]);
                            re += ar * br + ai * bi;
                            im += ai * br - ar * bi;
                        }
                        rho[2 * (i * d + j)] = re;
                        rho[2 * (i * d + j) + 1] = im;
                    }
                    tr += rho[2 * (i * d + i)];
                }
                if tr > 0.0 {
                    rho.iter_mut().for_each(|v| *v /= tr);
                } else {
                    for i in 0..d {
                        rho[2 * (i * d + i)] = 1.0 / d as f64;
                    }
                }
            }
        }
    }

    fn value(&mut self, theta: &[f64]) -> f64 {
        let codec = self.codec;
        let (k, m) = (codec.per_state(), self.povm.len());
        let weights = codec.weights(theta);
        for (i, &w) in weights.iter().enumerate() {
            self.load_state(&theta[i * k..(i + 1) * k]);
            pack_interleaved(&self.rho, codec.dim, &mut self.packed);
            for (e, out) in self.povm.iter().zip(&mut self.joint[i * m..(i + 1) * m]) {
                *out = w * dot(e, &self.packed).max(0.0);
            }
        }
        self.py.iter_mut().for_each(|v| *v = 0.0);
        self.pz.iter_mut().for_each(|v| *v = 0.0);
        let (mut h_vy, mut h_vz) = (0.0, 0.0);
        for row in self.joint.chunks(m) {
            self.ry.iter_mut().for_each(|v| *v = 0.0);
            self.rz.iter_mut().for_each(|v| *v = 0.0);
            for y in 0..self.y_size {
                for z in 0..self.z_size {
                    let p = row[y * self.z_size + z];
                    self.ry[y] += p;
                    self.rz[z] += p;
                }
            }
            for (acc, r) in self.py.iter_mut().zip(&self.ry) {
                *acc += r;
                h_vy += plogp(*r);
            }
            for (acc, r) in self.pz.iter_mut().zip(&self.rz) {
                *acc += r;
                h_vz += plogp(*r);
            }
        }
        let hy: f64 = self.py.iter().map(|&p| plogp(p)).sum();
        let hz: f64 = self.pz.iter().map(|&p| plogp(p)).sum();
        hy - h_vy - hz + h_vz
    }
}

/// One local search: a Nelder–Mead round followed by polish rounds
/// restarted from the best point with shrinking steps.
fn local_search(
    ch: &QccChannel,
    codec: &Codec,
    x0: Vec<f64>,
    opts: &SearchOptions,
) -> (Vec<f64>, f64) {
    let mut eval = Evaluator::new(ch, codec);
    let mut best = (x0.clone(), eval.value(&x0));
    let mut step = 1.0;
    for _ in 0..=opts.polish_rounds {
        let nm = NelderMeadOptions {
            step,
            max_evals: opts.iterations * 2 + codec.len() + 1,
            f_tol: 1e-14,
            x_tol: opts.tolerance,
        };
        let (x, v) = nelder_mead(|t| -eval.value(t), &best.0, nm);
        if -v > best.1 {
            best = (x, -v);
        }
        step *= 0.25;
    }
    best
}

/// Best ensemble found by randomized local search (default options).
pub fn p1_qcc_lower(ch: &QccChannel, restarts: usize, seed: u64) -> Result<(f64, QuantumEnsemble)> {
    p1_qcc_lower_with(
        ch,
        &SearchOptions {
            restarts,
            seed,
            ..Default::default()
        },
    )
}

/// Lower bound on `P₁` with its witnessing ensemble.
///
/// Restart `i` draws its starting point from the ChaCha stream `i` of
/// `seed`, so adding restarts never changes earlier ones and the result is
/// monotone in `restarts`. Ties go to the lowest restart index.
pub fn p1_qcc_lower_with(ch: &QccChannel, opts: &SearchOptions) -> Result<(f64, QuantumEnsemble)> {
    let d = ch.input_dim();
    let codec = Codec {
        dim: d,
        support: opts.support.unwrap_or(d * d).clamp(1, d * d),
        family: opts.family,
    };
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for e in &opts.starts {
        starts.push(codec.encode(e).ok_or_else(|| {
            Error::Validation("starting ensemble does not fit the search parameterization".into())
        })?);
    }
    let fixed = starts.len();
    let total = fixed + opts.restarts.max(if fixed == 0 { 1 } else { 0 });

    let best = (0..total)
        .into_par_iter()
        .map(|i| {
            let x0 = if i < fixed {
                starts[i].clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream((i - fixed) as u64);
                codec.random(&mut rng)
            };
            let (x, v) = local_search(ch, &codec, x0, opts);
            (i, v, x)
        })
        .reduce_with(|a, b| {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("at least one start");

    let (weights, states) = codec.decode(&best.2);
    let states: Vec<DensityMatrix> = states
        .into_iter()
        .map(DensityMatrix::from_hermitian_unchecked)
        .collect();
    let ensemble = QuantumEnsemble::new(weights, states)?;
    let value = ensemble_value(ch, &ensemble)?;
    if value < 0.0 {
        // A single state always achieves zero.
        let trivial = QuantumEnsemble::new(vec![1.0], vec![DensityMatrix::maximally_mixed(d)])?;
        return Ok((0.0, trivial));
    }
    Ok((value, ensemble))
}

/// Outcome of [`additivity_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdditivityReport {
    pub v1: f64,
    pub v2: f64,
    pub joint: f64,
    /// `joint − (v1 + v2)`; additivity predicts `≤ 0` up to optimizer slack.
    pub gap: f64,
    /// `gap > ANOMALY_TOLERANCE`: worth a closer look, not a counterexample.
    pub anomaly: bool,
}

/// Searches `W₁`, `W₂` and `W₁ ⊗ W₂` separately and compares. The joint
/// search also starts from the product of the two single-channel optima,
/// so `joint ≥ v1 + v2` up to rounding.
pub fn additivity_probe(
    ch1: &QccChannel,
    ch2: &QccChannel,
    restarts: usize,
    seed: u64,
) -> Result<AdditivityReport> {
    additivity_probe_with(
        ch1,
        ch2,
        &SearchOptions {
            restarts,
            seed,
            ..Default::default()
        },
    )
}

pub fn additivity_probe_with(
    ch1: &QccChannel,
    ch2: &QccChannel,
    opts: &SearchOptions,
) -> Result<AdditivityReport> {
    if ch1.input_dim() != 2 || ch2.input_dim() != 2 {
        return Err(Error::Validation(format!(
            "the probe pairs qubit channels; got input dimensions {} and {}",
            ch1.input_dim(),
            ch2.input_dim()
        )));
    }
    let single = |ch: &QccChannel, salt: u64| {
        p1_qcc_lower_with(
            ch,
            &SearchOptions {
                seed: opts.seed ^ salt,
                starts: Vec::new(),
                ..opts.clone()
            },
        )
    };
    let (v1, e1) = single(ch1, 0)?;
    let (v2, e2) = single(ch2, 0x9e37_79b9_7f4a_7c15)?;
    let joint_channel = ch1.tensor(ch2)?;
    let (joint, _) = p1_qcc_lower_with(
        &joint_channel,
        &SearchOptions {
            seed: opts.seed ^ 0x85eb_ca6b_c2b2_ae35,
            starts: vec![e1.product(&e2)?],
            ..opts.clone()
        },
    )?;
    let gap = joint - (v1 + v2);
    Ok(AdditivityReport {
        v1,
        v2,
        joint,
        gap,
        anomaly: gap > ANOMALY_TOLERANCE,
    })
}
