//! Initial states, exact eigenbasis propagation and state observables.
//!
//! A quench starts from an eigenstate (or a superposition of eigenstates) of
//! the decoupled Hamiltonian `H_I ⊗ 1 + 1 ⊗ H_q` and evolves under the full
//! Hamiltonian. Evolution is exact: `|ψ(t)⟩ = Σ_k e^{-iE_k t} ⟨k|ψ(0)⟩ |k⟩`.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use nalgebra::DVector;
use num_complex::Complex as C;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::operators::{
    build_hamiltonian, build_parity, build_ring, HamiltonianSpec, HermitianOperator, Model, SiteLayout,
    TransverseField,
};
use crate::scalar::Scalar;
use crate::seeding::{stream_rng, StreamDomain};
use crate::spectral::{eigendecompose_by_parity, Spectrum};
use crate::theory::{self, LimitingRegime};
use crate::{Complex, ComplexMatrix, Error, Matrix, Result};

/// Allowed deviation of `‖ψ‖` from one.
pub const NORM_TOL: f64 = 1e-10;

/// Normalised amplitude vector over a ring/qubit bipartition.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex>,
    layout: SiteLayout,
}

impl QuantumState {
    /// Wraps amplitudes that are already normalised.
    pub fn new(amplitudes: Vec<Complex>, layout: SiteLayout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::arg(format!(
                "{} amplitudes for a {}-dimensional layout",
                amplitudes.len(),
                layout.dim()
            )));
        }
        let state = QuantumState { amplitudes, layout };
        if state.norm_deviation() > NORM_TOL {
            return Err(Error::arg(format!("state is not normalised (‖ψ‖ = {})", state.norm())));
        }
        Ok(state)
    }

    /// Normalises arbitrary non-zero amplitudes.
    pub fn normalized(mut amplitudes: Vec<Complex>, layout: SiteLayout) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::arg("cannot normalise a zero or non-finite vector"));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::new(amplitudes, layout)
    }

    /// `|ring⟩ ⊗ |qubits⟩` in the standard layout.
    pub fn product(ring: &[Complex], qubits: &[Complex]) -> Result<Self> {
        let layout = SiteLayout::standard(log2_exact(ring.len())?, log2_exact(qubits.len())?);
        let amps = ring.iter().flat_map(|&r| qubits.iter().map(move |&q| r * q)).collect();
        Self::normalized(amps, layout)
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_deviation(&self) -> f64 {
        (self.norm() - 1.0).abs()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &QuantumState) -> Complex {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn energy(&self, h: &HermitianOperator) -> f64 {
        h.expectation(&self.amplitudes)
    }

    /// Amplitudes as a `2^L x 2^n` matrix `Ψ[ring, qubit]`.
    pub fn amplitude_matrix(&self) -> ComplexMatrix {
        let (rd, qd) = (self.layout.ring_dim(), self.layout.qubit_dim());
        if self.layout.is_standard() {
            return ComplexMatrix::from_row_slice(rd, qd, &self.amplitudes);
        }
        let mut m = ComplexMatrix::zeros(rd, qd);
        for (i, &z) in self.amplitudes.iter().enumerate() {
            let (r, q) = self.layout.split_index(i);
            m[(r, q)] = z;
        }
        m
    }
}

fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::arg(format!("dimension {n} is not a power of two")));
    }
    Ok(n.trailing_zeros() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Qubits,
    Ring,
}

/// Reduced density matrix of one side of the bipartition.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    pub entries: ComplexMatrix,
    pub subsystem: Subsystem,
}

impl ReducedDensityMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `tr ρ²`, computed as `Σ |ρ_ij|²`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn trace(&self) -> Complex {
        self.entries.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Eigenvalues of `ρ`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Partial trace over the ring: `ρ_q = Ψᵀ Ψ*`.
pub fn reduce_to_qubits(state: &QuantumState) -> ReducedDensityMatrix {
    let psi = state.amplitude_matrix();
    ReducedDensityMatrix { entries: psi.transpose() * psi.conjugate(), subsystem: Subsystem::Qubits }
}

/// Partial trace over the qubits: `ρ_I = Ψ Ψ†`.
pub fn reduce_to_ring(state: &QuantumState) -> ReducedDensityMatrix {
    let psi = state.amplitude_matrix();
    ReducedDensityMatrix { entries: &psi * psi.adjoint(), subsystem: Subsystem::Ring }
}

/// `1 - tr ρ²`.
pub fn linear_entropy(rho: &ReducedDensityMatrix) -> f64 {
    1.0 - rho.purity()
}

/// An orthonormal basis states can be expanded in.
pub trait Basis {
    fn dim(&self) -> usize;

    /// Expansion coefficients `⟨k|ψ⟩` in basis order.
    fn overlaps(&self, state: &QuantumState) -> Result<Vec<Complex>>;
}

impl Basis for Spectrum {
    fn dim(&self) -> usize {
        Spectrum::dim(self)
    }

    fn overlaps(&self, state: &QuantumState) -> Result<Vec<Complex>> {
        if state.dim() != self.dim() {
            return Err(Error::arg("state and basis dimensions differ"));
        }
        let (re, im) = split(state.amplitudes());
        let vt = self.eigenvectors.transpose();
        let (cr, ci) = (&vt * re, &vt * im);
        Ok(cr.iter().zip(ci.iter()).map(|(&r, &i)| C::new(r, i)).collect())
    }
}

fn split(amps: &[Complex]) -> (DVector<f64>, DVector<f64>) {
    (
        DVector::from_iterator(amps.len(), amps.iter().map(|z| z.re)),
        DVector::from_iterator(amps.len(), amps.iter().map(|z| z.im)),
    )
}

/// Inverse participation ratio `Σ_k |⟨k|ψ⟩|⁴`.
pub fn ipr(state: &QuantumState, basis: &impl Basis) -> Result<f64> {
    Ok(basis.overlaps(state)?.iter().map(|z| z.norm_sqr().powi(2)).sum())
}

/// Coherence `Σ_{m≠m'} |ρ_{mm'}|²` of the pure state `|ψ⟩⟨ψ|` in `basis`.
pub fn coherence_measure(state: &QuantumState, basis: &impl Basis) -> Result<f64> {
    let p: Vec<f64> = basis.overlaps(state)?.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = p.iter().sum();
    let diag: f64 = p.iter().map(|x| x * x).sum();
    Ok(total * total - diag)
}

/// Coherence `Σ_{m≠m'} |ρ_{mm'}|²` of a density matrix in the columns of `basis`.
pub fn coherence_of_density(rho: &ReducedDensityMatrix, basis: &Spectrum) -> Result<f64> {
    if rho.dim() != basis.dim() || basis.len() != basis.dim() {
        return Err(Error::arg("density matrix and basis dimensions differ"));
    }
    let u = basis.eigenvectors.map(|x| C::new(x, 0.0));
    let rotated = u.transpose() * &rho.entries * &u;
    let mut c2 = 0.0;
    for j in 0..rotated.ncols() {
        for i in 0..rotated.nrows() {
            if i != j {
                c2 += rotated[(i, j)].norm_sqr();
            }
        }
    }
    Ok(c2)
}

/// Eigenbasis of the decoupled Hamiltonian: ring eigenstates ⊗ qubit
/// computational states.
#[derive(Debug, Clone)]
pub struct PreQuench {
    /// Ring eigenbasis with parity labels.
    pub ring: Spectrum,
    /// Diagonal of `H_q` in computational order.
    pub qubit_energies: Vec<f64>,
    pub layout: SiteLayout,
}

impl PreQuench {
    pub fn new(spec: &HamiltonianSpec, fields: &[f64]) -> Result<Self> {
        let ring_h = build_ring(spec, fields)?;
        let ring = eigendecompose_by_parity(&ring_h, &build_parity(spec.ring_len, 0)?)?;
        let n = spec.qubits;
        let qubit_energies = (0..1usize << n)
            .map(|q| {
                let down = q.count_ones() as f64;
                -0.5 * spec.delta * ((n as f64) - 2.0 * down)
            })
            .collect();
        Ok(PreQuench { ring, qubit_energies, layout: spec.layout() })
    }

    /// Index of the qubit ground state; ties resolve to the lowest index
    /// (all qubits up).
    pub fn qubit_ground_index(&self) -> usize {
        let mut best = 0;
        for (q, &e) in self.qubit_energies.iter().enumerate() {
            if e < self.qubit_energies[best] {
                best = q;
            }
        }
        best
    }

    /// Ring ground state. A (near-)degenerate ground level is resolved to
    /// its parity `+1` member.
    pub fn ring_ground(&self) -> Result<Vec<f64>> {
        let e0 = self.ring.ground_energy();
        let tol = 1e-8 * self.ring.energy_scale();
        let candidates: Vec<usize> = (0..self.ring.len())
            .take_while(|&k| self.ring.eigenvalues[k] - e0 <= tol)
            .collect();
        let pick = if candidates.len() == 1 {
            candidates[0]
        } else {
            let labels = self
                .ring
                .level_parity
                .as_ref()
                .ok_or_else(|| Error::Degeneracy("ring ground level degenerate without parity labels".into()))?;
            let even: Vec<usize> = candidates.iter().copied().filter(|&k| labels[k] > 0).collect();
            match even.as_slice() {
                [k] => *k,
                _ => {
                    return Err(Error::Degeneracy(format!(
                        "{}-fold ring ground level has {} parity +1 members",
                        candidates.len(),
                        even.len()
                    )))
                }
            }
        };
        Ok(self.ring.eigenvectors.column(pick).iter().copied().collect())
    }

    fn qubit_basis_state(&self, q: usize) -> Vec<Complex> {
        let mut v = vec![C::new(0.0, 0.0); self.qubit_energies.len()];
        v[q] = C::new(1.0, 0.0);
        v
    }

    /// Qubit ground state as an amplitude vector.
    pub fn qubit_ground(&self) -> Vec<Complex> {
        self.qubit_basis_state(self.qubit_ground_index())
    }
}

impl Basis for PreQuench {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn overlaps(&self, state: &QuantumState) -> Result<Vec<Complex>> {
        if state.layout() != &self.layout {
            return Err(Error::arg("state layout differs from the pre-quench basis"));
        }
        let psi = state.amplitude_matrix();
        let u = self.ring.eigenvectors.map(|x| C::new(x, 0.0));
        let coeffs = u.transpose() * psi;
        Ok(coeffs.transpose().iter().copied().collect())
    }
}

/// Product of the parity-resolved ring ground state and the qubit ground state.
pub fn ground_product_state(pre: &PreQuench) -> Result<QuantumState> {
    let ring: Vec<Complex> = pre.ring_ground()?.into_iter().map(|x| C::new(x, 0.0)).collect();
    QuantumState::product(&ring, &pre.qubit_ground())
}

/// Uniform phases in `[0, 2π)` from the `Phases` stream `index` of `seed`.
pub fn random_phases(count: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, StreamDomain::Phases, index);
    (0..count).map(|_| rng.random_range(0.0..TAU)).collect()
}

/// `N^{-1/2} Σ_{m<N} e^{iφ_m} |m⟩ ⊗ qubit_part` over the `N` lowest ring
/// eigenstates.
pub fn maximally_coherent_state(
    ring_basis: &Spectrum,
    count: usize,
    phases: &[f64],
    qubit_part: &[Complex],
) -> Result<QuantumState> {
    if count == 0 || count > ring_basis.len() {
        return Err(Error::arg(format!(
            "coherent superposition over {count} states, basis has {}",
            ring_basis.len()
        )));
    }
    if phases.len() != count {
        return Err(Error::arg(format!("{} phases for {count} states", phases.len())));
    }
    let mut ring = vec![C::new(0.0, 0.0); ring_basis.dim()];
    let w = 1.0 / (count as f64).sqrt();
    for (m, &phi) in phases.iter().enumerate() {
        let z = C::from_polar(w, phi);
        for (r, &v) in ring_basis.eigenvectors.column(m).iter().enumerate() {
            ring[r] += z * v;
        }
    }
    QuantumState::product(&ring, qubit_part)
}

/// Exact propagator for one initial state in a complete eigenbasis.
pub struct Propagator<'a> {
    spectrum: &'a Spectrum,
    coeff_re: DVector<f64>,
    coeff_im: DVector<f64>,
    layout: SiteLayout,
}

/// Times evaluated per matrix product in [`Propagator::states_at`].
const TIME_CHUNK: usize = 64;

impl<'a> Propagator<'a> {
    pub fn new(spectrum: &'a Spectrum, initial: &QuantumState) -> Result<Self> {
        if spectrum.dim() != initial.dim() {
            return Err(Error::arg("state and spectrum dimensions differ"));
        }
        if spectrum.len() != spectrum.dim() {
            return Err(Error::arg("propagation needs a complete eigenbasis"));
        }
        let (re, im) = split(initial.amplitudes());
        let vt = spectrum.eigenvectors.transpose();
        Ok(Propagator { spectrum, coeff_re: &vt * re, coeff_im: &vt * im, layout: initial.layout().clone() })
    }

    /// Rotated eigenbasis coefficients `e^{-iE_k t} c_k` as (re, im).
    fn phased(&self, t: f64, k: usize) -> (f64, f64) {
        let (s, c) = (self.spectrum.eigenvalues[k] * t).sin_cos();
        let (a, b) = (self.coeff_re[k], self.coeff_im[k]);
        (a * c + b * s, b * c - a * s)
    }

    pub fn state_at(&self, t: f64) -> QuantumState {
        let dim = self.spectrum.dim();
        let mut d = Matrix::zeros(dim, 2);
        for k in 0..dim {
            let (r, i) = self.phased(t, k);
            d[(k, 0)] = r;
            d[(k, 1)] = i;
        }
        let psi = &self.spectrum.eigenvectors * d;
        let amplitudes = (0..dim).map(|i| C::new(psi[(i, 0)], psi[(i, 1)])).collect();
        QuantumState { amplitudes, layout: self.layout.clone() }
    }

    /// States at every time, batched into matrix products.
    pub fn states_at(&self, times: &[f64]) -> Vec<QuantumState> {
        let mut out = Vec::with_capacity(times.len());
        self.for_each_state(times, |_, s| out.push(s));
        out
    }

    /// Calls `f(index, state)` for every time without keeping the states.
    pub fn for_each_state(&self, times: &[f64], mut f: impl FnMut(usize, QuantumState)) {
        let dim = self.spectrum.dim();
        for (c, chunk) in times.chunks(TIME_CHUNK).enumerate() {
            let mut d = Matrix::zeros(dim, 2 * chunk.len());
            for (j, &t) in chunk.iter().enumerate() {
                for k in 0..dim {
                    let (r, i) = self.phased(t, k);
                    d[(k, 2 * j)] = r;
                    d[(k, 2 * j + 1)] = i;
                }
            }
            let psi = &self.spectrum.eigenvectors * d;
            for j in 0..chunk.len() {
                let amplitudes = (0..dim).map(|i| C::new(psi[(i, 2 * j)], psi[(i, 2 * j + 1)])).collect();
                f(c * TIME_CHUNK + j, QuantumState { amplitudes, layout: self.layout.clone() });
            }
        }
    }
}

/// `|ψ(t)⟩` under the Hamiltonian whose eigendecomposition is `post_quench`.
pub fn evolve(state0: &QuantumState, post_quench: &Spectrum, t: f64) -> Result<QuantumState> {
    Ok(Propagator::new(post_quench, state0)?.state_at(t))
}

/// Recipe for the initial state of a quench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Ring ground state ⊗ qubit ground state.
    Incoherent,
    /// Equal-weight superposition of the `count` lowest ring eigenstates ⊗
    /// qubit ground state. Phases default to a seeded uniform draw.
    MaximallyCoherent {
        count: usize,
        #[serde(default)]
        phases: Option<Vec<f64>>,
    },
}

/// Time series of one quench.
#[derive(Debug, Clone, PartialEq)]
pub struct QuenchTrace {
    pub times: Vec<f64>,
    pub linear_entropy: Vec<f64>,
    pub purity: Vec<f64>,
    pub ipr: Option<Vec<f64>>,
    pub analytic: Option<Vec<f64>>,
}

pub const TRACE_HEADER: &str = "t,S_L,purity,ipr,analytic";

impl QuenchTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        let opt = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map(|v| v[i].to_string()).unwrap_or_default();
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.times[i],
                self.linear_entropy[i],
                self.purity[i],
                opt(&self.ipr, i),
                opt(&self.analytic, i)
            );
        }
        out
    }

    /// Mean and population variance of `S_L` over `[t_min, t_max]`.
    pub fn statistics(&self, window: (f64, f64)) -> Result<(f64, f64)> {
        time_statistics(&self.times, &self.linear_entropy, window)
    }
}

/// Mean and population variance of the samples with `t ∈ [t_min, t_max]`.
pub fn time_statistics<T: Scalar>(times: &[T], values: &[T], window: (T, T)) -> Result<(T, T)> {
    if times.len() != values.len() {
        return Err(Error::arg("times and values differ in length"));
    }
    let inside: Vec<T> = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= window.0 && t <= window.1)
        .map(|(_, &v)| v)
        .collect();
    if inside.is_empty() {
        return Err(Error::arg(format!("no samples in window [{}, {}]", window.0, window.1)));
    }
    let n = T::from_count(inside.len());
    let mean = inside.iter().fold(T::zero(), |a, &v| a + v) / n;
    let var = inside.iter().fold(T::zero(), |a, &v| a + (v - mean) * (v - mean)) / n;
    Ok((mean, var))
}

/// Default averaging window `[0.2 T, T]` for a trace ending at `T`.
pub fn default_window(times: &[f64]) -> (f64, f64) {
    let end = times.last().copied().unwrap_or(0.0);
    (0.2 * end, end)
}

/// Uniform grid of `points` samples over `[start, stop]`.
pub fn uniform_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Parameter thresholds below which the single-qubit limiting formulas apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityWindows {
    pub weak_field_max_h: f64,
    pub strong_field_max_j: f64,
}

impl Default for ValidityWindows {
    fn default() -> Self {
        ValidityWindows { weak_field_max_h: 0.1, strong_field_max_j: 0.1 }
    }
}

/// Limiting regime of `spec`, if any.
pub fn limiting_regime(spec: &HamiltonianSpec, windows: &ValidityWindows) -> Option<LimitingRegime<f64>> {
    let h = match (spec.model, spec.field) {
        (Model::SunburstIsing, TransverseField::Uniform(h)) => h,
        _ => return None,
    };
    if spec.qubits != 1 || spec.kappa <= 0.0 {
        return None;
    }
    if h.abs() <= windows.weak_field_max_h {
        LimitingRegime::weak_field(spec.kappa, spec.delta).ok()
    } else if spec.hopping.abs() <= windows.strong_field_max_j {
        LimitingRegime::strong_field(spec.kappa, spec.delta, h).ok()
    } else {
        None
    }
}

/// Closed-form `S_L(t)` matching this spec and initial state, if one applies.
pub fn analytic_prediction(
    spec: &HamiltonianSpec,
    initial: &InitialState,
    times: &[f64],
    windows: &ValidityWindows,
) -> Option<Vec<f64>> {
    if spec.kappa == 0.0 {
        return Some(vec![0.0; times.len()]);
    }
    match initial {
        InitialState::Incoherent => {
            let regime = limiting_regime(spec, windows)?;
            Some(times.iter().map(|&t| theory::limiting_entropy(t, &regime)).collect())
        }
        InitialState::MaximallyCoherent { count, .. } if *count == 1usize << spec.ring_len => {
            let s_inf = theory::lubkin_value(spec.qubits);
            Some(times.iter().map(|&t| theory::full_transition_curve(t, spec.kappa, spec.qubits, s_inf)).collect())
        }
        _ => None,
    }
}

/// Post-quench Hamiltonian, its eigendecomposition and the pre-quench basis,
/// shared by any number of initial states and time grids.
pub struct QuenchSystem {
    pub spec: HamiltonianSpec,
    pub fields: Vec<f64>,
    pub hamiltonian: HermitianOperator,
    pub spectrum: Spectrum,
    pub pre: PreQuench,
}

impl QuenchSystem {
    pub fn new(spec: &HamiltonianSpec, fields: &[f64]) -> Result<Self> {
        let hamiltonian = build_hamiltonian(spec, fields)?;
        let parity = build_parity(spec.ring_len, spec.qubits)?;
        let spectrum = eigendecompose_by_parity(&hamiltonian, &parity)?;
        let pre = PreQuench::new(spec, fields)?;
        Ok(QuenchSystem { spec: spec.clone(), fields: fields.to_vec(), hamiltonian, spectrum, pre })
    }

    /// Builds the state described by `recipe`. Random phases come from the
    /// spec seed, one stream per superposition size.
    pub fn prepare(&self, recipe: &InitialState) -> Result<QuantumState> {
        match recipe {
            InitialState::Incoherent => ground_product_state(&self.pre),
            InitialState::MaximallyCoherent { count, phases } => {
                let phases = match phases {
                    Some(p) => p.clone(),
                    None => random_phases(*count, self.spec.seed, *count as u64),
                };
                maximally_coherent_state(&self.pre.ring, *count, &phases, &self.pre.qubit_ground())
            }
        }
    }

    /// Evolves `initial` over `times`, recording entropy, purity and
    /// optionally the IPR in the pre-quench basis.
    pub fn trace(&self, initial: &QuantumState, times: &[f64], with_ipr: bool) -> Result<QuenchTrace> {
        let prop = Propagator::new(&self.spectrum, initial)?;
        let mut purity = vec![0.0; times.len()];
        let mut iprs = with_ipr.then(|| vec![0.0; times.len()]);
        let mut failure = None;
        prop.for_each_state(times, |i, state| {
            purity[i] = reduce_to_qubits(&state).purity();
            if let Some(v) = iprs.as_mut() {
                match ipr(&state, &self.pre) {
                    Ok(x) => v[i] = x,
                    Err(e) => failure = Some(e),
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(QuenchTrace {
            times: times.to_vec(),
            linear_entropy: purity.iter().map(|p| 1.0 - p).collect(),
            purity,
            ipr: iprs,
            analytic: None,
        })
    }
}

/// Runs one quench of `spec` (ring fields from realization 0) and attaches
/// the closed-form prediction when the regime has one.
pub fn run_quench(spec: &HamiltonianSpec, initial: &InitialState, times: &[f64]) -> Result<QuenchTrace> {
    if times.is_empty() {
        return Err(Error::arg("time grid is empty"));
    }
    let system = QuenchSystem::new(spec, &spec.ring_fields(0))?;
    let state = system.prepare(initial)?;
    let mut trace = system.trace(&state, times, true)?;
    trace.analytic = analytic_prediction(spec, initial, times, &ValidityWindows::default());
    Ok(trace)
}
