//! Hamiltonians and symmetry operators of the sunburst model.
//!
//! Tensor slots are ordered ring first, qubits last: slot `s` of an
//! `N`-site register is bit `N - 1 - s` of the computational basis index, so
//! a basis index factorises as `ring_index * 2^n + qubit_index` and the
//! amplitude vector reshapes row-major into a `2^L x 2^n` matrix.
//!
//! Every term of the model is a Pauli string with an even number of `σʸ`
//! factors, so all Hamiltonians built here are real symmetric and are stored
//! as such.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex as C;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seeding::{stream_rng, StreamDomain};
use crate::{Complex, ComplexMatrix, Error, Matrix, Result};

/// Default cap on the total number of sites `L + n`.
pub const DEFAULT_DIM_CAP: usize = 14;
/// Environment variable overriding [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "SUNBURST_DIM_CAP";

const HERMITIAN_TOL: f64 = 1e-12;

/// Current site cap, honouring `SUNBURST_DIM_CAP`.
pub fn dim_cap() -> usize {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

/// Fails with a resource error when `total_sites` exceeds the cap.
pub fn check_sites(total_sites: usize) -> Result<()> {
    let cap = dim_cap();
    if total_sites > cap || total_sites >= 63 {
        return Err(Error::Resource(format!(
            "{total_sites} sites exceed the cap of {cap} (set {DIM_CAP_ENV} to raise it)"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "ising", alias = "SunburstIsing")]
    SunburstIsing,
    #[serde(rename = "xxz", alias = "SunburstXXZ")]
    SunburstXXZ,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::SunburstIsing => f.write_str("ising"),
            Model::SunburstXXZ => f.write_str("xxz"),
        }
    }
}

/// Transverse field of the Ising ring: one value for every site, or an
/// interval from which each site draws independently per realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransverseField {
    Uniform(f64),
    Interval([f64; 2]),
}

impl Default for TransverseField {
    fn default() -> Self {
        TransverseField::Uniform(0.0)
    }
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

/// Full parameterization of the sunburst or XXZ-sunburst model.
///
/// JSON field names are the physics symbols: `model, L, n, b, J, h, delta,
/// kappa, D, seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub model: Model,
    #[serde(rename = "L")]
    pub ring_len: usize,
    #[serde(rename = "n")]
    pub qubits: usize,
    #[serde(rename = "b", default = "one")]
    pub spacing: usize,
    #[serde(rename = "J", default = "unit")]
    pub hopping: f64,
    #[serde(rename = "h", default)]
    pub field: TransverseField,
    pub delta: f64,
    pub kappa: f64,
    #[serde(rename = "D", default)]
    pub disorder: f64,
    #[serde(default)]
    pub seed: u64,
}

impl HamiltonianSpec {
    /// Ising sunburst with a uniform transverse field.
    pub fn ising(ring_len: usize, qubits: usize, spacing: usize) -> Self {
        HamiltonianSpec {
            model: Model::SunburstIsing,
            ring_len,
            qubits,
            spacing,
            hopping: 1.0,
            field: TransverseField::Uniform(0.0),
            delta: 1.0,
            kappa: 0.0,
            disorder: 0.0,
            seed: 0,
        }
    }

    /// Disordered XXZ sunburst with `W_i ∈ [-disorder, disorder]`.
    pub fn xxz(ring_len: usize, qubits: usize, spacing: usize, disorder: f64) -> Self {
        HamiltonianSpec {
            model: Model::SunburstXXZ,
            disorder,
            ..Self::ising(ring_len, qubits, spacing)
        }
    }

    pub fn with_field(mut self, field: TransverseField) -> Self {
        self.field = field;
        self
    }

    pub fn with_h(self, h: f64) -> Self {
        self.with_field(TransverseField::Uniform(h))
    }

    pub fn with_hopping(mut self, j: f64) -> Self {
        self.hopping = j;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn total_sites(&self) -> usize {
        self.ring_len + self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.total_sites()
    }

    /// Ring slot the `j`-th qubit (0-based) couples to.
    pub fn qubit_anchor(&self, j: usize) -> usize {
        j * self.spacing
    }

    pub fn layout(&self) -> SiteLayout {
        SiteLayout::standard(self.ring_len, self.qubits)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ring_len < 3 {
            return Err(Error::arg(format!("ring length L = {} must be >= 3", self.ring_len)));
        }
        if self.qubits < 1 {
            return Err(Error::arg("qubit count n must be >= 1"));
        }
        if self.spacing < 1 {
            return Err(Error::arg("qubit spacing b must be >= 1"));
        }
        if self.qubits * self.spacing > self.ring_len {
            return Err(Error::arg(format!(
                "n * b = {} exceeds L = {}",
                self.qubits * self.spacing,
                self.ring_len
            )));
        }
        let finite = [self.hopping, self.delta, self.kappa, self.disorder]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::arg("all energies must be finite"));
        }
        if self.kappa < 0.0 {
            return Err(Error::arg("kappa must be >= 0"));
        }
        if self.disorder < 0.0 {
            return Err(Error::arg("disorder half-width D must be >= 0"));
        }
        match self.field {
            TransverseField::Uniform(h) if !h.is_finite() => {
                return Err(Error::arg("transverse field must be finite"))
            }
            TransverseField::Interval([lo, hi]) if !(lo.is_finite() && hi.is_finite() && lo <= hi) => {
                return Err(Error::arg("transverse field interval must be finite with lo <= hi"))
            }
            _ => {}
        }
        check_sites(self.total_sites())
    }

    /// Per-site ring fields for realization `index`: transverse fields `h_i`
    /// for the Ising ring, disorder fields `W_i` for the XXZ ring.
    pub fn ring_fields(&self, index: u64) -> Vec<f64> {
        let mut rng = stream_rng(self.seed, StreamDomain::Disorder, index);
        match self.model {
            Model::SunburstIsing => match self.field {
                TransverseField::Uniform(h) => vec![h; self.ring_len],
                TransverseField::Interval([lo, hi]) => (0..self.ring_len)
                    .map(|_| if hi > lo { rng.random_range(lo..=hi) } else { lo })
                    .collect(),
            },
            Model::SunburstXXZ => {
                let d = self.disorder;
                (0..self.ring_len)
                    .map(|_| if d > 0.0 { rng.random_range(-d..=d) } else { 0.0 })
                    .collect()
            }
        }
    }

    /// Whether the ring fields are random (so realizations differ).
    pub fn is_disordered(&self) -> bool {
        match self.model {
            Model::SunburstIsing => matches!(self.field, TransverseField::Interval([lo, hi]) if hi > lo),
            Model::SunburstXXZ => self.disorder > 0.0,
        }
    }
}

/// Assignment of ring spins and qubits to tensor slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteLayout {
    pub ring_sites: Vec<usize>,
    pub qubit_sites: Vec<usize>,
}

impl SiteLayout {
    /// Ring in slots `0..ring`, qubits in slots `ring..ring + qubits`.
    pub fn standard(ring: usize, qubits: usize) -> Self {
        SiteLayout {
            ring_sites: (0..ring).collect(),
            qubit_sites: (ring..ring + qubits).collect(),
        }
    }

    pub fn new(ring_sites: Vec<usize>, qubit_sites: Vec<usize>) -> Result<Self> {
        let layout = SiteLayout { ring_sites, qubit_sites };
        let total = layout.total_sites();
        let mut seen = vec![false; total];
        for &s in layout.ring_sites.iter().chain(&layout.qubit_sites) {
            if s >= total || std::mem::replace(&mut seen[s], true) {
                return Err(Error::arg("site layout must be a permutation of 0..L+n"));
            }
        }
        Ok(layout)
    }

    pub fn total_sites(&self) -> usize {
        self.ring_sites.len() + self.qubit_sites.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.total_sites()
    }

    pub fn ring_dim(&self) -> usize {
        1 << self.ring_sites.len()
    }

    pub fn qubit_dim(&self) -> usize {
        1 << self.qubit_sites.len()
    }

    pub fn is_standard(&self) -> bool {
        self.ring_sites.iter().chain(&self.qubit_sites).enumerate().all(|(i, &s)| i == s)
    }

    /// Splits a basis index into `(ring_index, qubit_index)`.
    pub fn split_index(&self, index: usize) -> (usize, usize) {
        let total = self.total_sites();
        let gather = |sites: &[usize]| {
            sites.iter().fold(0usize, |acc, &s| (acc << 1) | ((index >> (total - 1 - s)) & 1))
        };
        (gather(&self.ring_sites), gather(&self.qubit_sites))
    }
}

/// Single-site Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> [[Complex; 2]; 2] {
        let (o, z, i) = (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0));
        match self {
            Pauli::I => [[o, z], [z, o]],
            Pauli::X => [[z, o], [o, z]],
            Pauli::Y => [[z, -i], [i, z]],
            Pauli::Z => [[o, z], [z, -o]],
        }
    }
}

/// A real-coefficient Pauli string acting on an `N`-site register.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    coeff: f64,
    flip: usize,
    phase: usize,
    /// `i^(number of Y factors)`, real because the count is even.
    y_sign: f64,
}

impl PauliTerm {
    pub fn new(coeff: f64, factors: &[(usize, Pauli)], sites: usize) -> Result<Self> {
        let (mut flip, mut phase, mut ys) = (0usize, 0usize, 0u32);
        for &(site, p) in factors {
            if site >= sites {
                return Err(Error::arg(format!("site {site} out of range for {sites} sites")));
            }
            let bit = 1usize << (sites - 1 - site);
            if (flip | phase) & bit != 0 {
                return Err(Error::arg(format!("site {site} repeated in Pauli string")));
            }
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Z => phase |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    ys += 1;
                }
            }
        }
        if ys % 2 == 1 {
            return Err(Error::arg("Pauli strings with an odd number of Y factors are not real"));
        }
        let y_sign = if ys % 4 == 0 { 1.0 } else { -1.0 };
        Ok(PauliTerm { coeff, flip, phase, y_sign })
    }

    /// Image of basis state `index`: `(target index, matrix element)`.
    #[inline]
    pub fn apply(&self, index: usize) -> (usize, f64) {
        // Y = i X Z, so Z phases are read off the input bit before the flip.
        let sign = if (index & self.phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        (index ^ self.flip, self.coeff * self.y_sign * sign)
    }
}

/// Sum of real Pauli strings on a fixed register.
#[derive(Debug, Clone)]
pub struct PauliSum {
    sites: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn new(sites: usize) -> Self {
        PauliSum { sites, terms: Vec::new() }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, coeff: f64, factors: &[(usize, Pauli)]) -> Result<()> {
        if coeff != 0.0 {
            self.terms.push(PauliTerm::new(coeff, factors, self.sites)?);
        }
        Ok(())
    }

    pub fn extend(&mut self, other: PauliSum) {
        debug_assert_eq!(self.sites, other.sites);
        self.terms.extend(other.terms);
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        check_sites(self.sites)?;
        let dim = 1usize << self.sites;
        let mut m = Matrix::zeros(dim, dim);
        for col in 0..dim {
            for term in &self.terms {
                let (row, v) = term.apply(col);
                m[(row, col)] += v;
            }
        }
        HermitianOperator::from_matrix(m)
    }
}

/// Dense Hermitian operator in its real-symmetric representation.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: Matrix,
}

impl HermitianOperator {
    /// Wraps a real matrix, rejecting non-square or non-symmetric input.
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::arg("operator matrix must be square"));
        }
        let op = HermitianOperator { matrix };
        let res = op.hermiticity_residual();
        if res > HERMITIAN_TOL * op.scale() {
            return Err(Error::arg(format!("matrix is not Hermitian (residual {res:e})")));
        }
        Ok(op)
    }

    /// Accepts a complex Hermitian matrix whose imaginary part vanishes.
    pub fn from_complex(matrix: &ComplexMatrix) -> Result<Self> {
        let imag = matrix.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
        if imag > HERMITIAN_TOL {
            return Err(Error::arg("operator has a non-zero imaginary part"));
        }
        Self::from_matrix(matrix.map(|z| z.re))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        HermitianOperator { matrix: Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// `max |M - M†|` entrywise.
    pub fn hermiticity_residual(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in (j + 1)..n {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Largest absolute entry, floored at one.
    pub fn scale(&self) -> f64 {
        self.matrix.amax().max(1.0)
    }

    /// `max |[A, B]|` entrywise.
    pub fn commutator_residual(&self, other: &HermitianOperator) -> f64 {
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        (ab - ba).amax()
    }

    /// `⟨v|M|v⟩` for a real vector.
    pub fn expectation_real(&self, v: &[f64]) -> f64 {
        let v = nalgebra::DVectorView::from_slice(v, v.len());
        v.dot(&(&self.matrix * v))
    }

    /// `⟨ψ|M|ψ⟩` for a complex amplitude vector.
    pub fn expectation(&self, psi: &[Complex]) -> f64 {
        let re = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z.re));
        let im = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z.im));
        re.dot(&(&self.matrix * &re)) + im.dot(&(&self.matrix * &im))
    }
}

/// Global spin-flip parity `∏σᶻ ⊗ ∏Σᶻ`, stored as its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityOperator {
    sites: usize,
}

impl ParityOperator {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    /// Diagonal entry for basis state `index`: `(-1)^(number of down spins)`.
    #[inline]
    pub fn sign(&self, index: usize) -> f64 {
        if index.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Basis indices with parity `sign` in ascending order.
    pub fn sector_indices(&self, sign: i8) -> Vec<usize> {
        (0..self.dim()).filter(|&i| (self.sign(i) > 0.0) == (sign > 0)).collect()
    }

    pub fn to_operator(&self) -> HermitianOperator {
        let d: Vec<f64> = (0..self.dim()).map(|i| self.sign(i)).collect();
        HermitianOperator::diagonal(&d)
    }

    /// `max |[H, P]|` entrywise, exploiting that `P` is diagonal.
    pub fn commutator_residual(&self, h: &HermitianOperator) -> f64 {
        let m = h.matrix();
        let mut worst = 0.0f64;
        for j in 0..m.ncols() {
            let pj = self.sign(j);
            for i in 0..m.nrows() {
                if self.sign(i) != pj {
                    worst = worst.max(2.0 * m[(i, j)].abs());
                }
            }
        }
        worst
    }

    /// `⟨v|P|v⟩` for a real vector.
    pub fn expectation_real(&self, v: impl IntoIterator<Item = f64>) -> f64 {
        v.into_iter().enumerate().map(|(i, x)| self.sign(i) * x * x).sum()
    }
}

/// Parity over `ring + qubits` sites.
pub fn build_parity(ring: usize, qubits: usize) -> Result<ParityOperator> {
    let sites = ring + qubits;
    check_sites(sites)?;
    Ok(ParityOperator { sites })
}

/// Places `local_op` at tensor slot `site` of a `total_sites` register:
/// `1 ⊗ … ⊗ local_op ⊗ … ⊗ 1`.
pub fn kron_embed(local_op: &[[Complex; 2]; 2], site: usize, total_sites: usize) -> Result<ComplexMatrix> {
    if site >= total_sites {
        return Err(Error::arg(format!("site {site} out of range for {total_sites} sites")));
    }
    check_sites(total_sites)?;
    let local = DMatrix::from_fn(2, 2, |i, j| local_op[i][j]);
    let eye = ComplexMatrix::identity(2, 2);
    let mut out = ComplexMatrix::identity(1, 1);
    for s in 0..total_sites {
        out = out.kronecker(if s == site { &local } else { &eye });
    }
    Ok(out)
}

fn ring_terms(spec: &HamiltonianSpec, fields: &[f64], sites: usize) -> Result<PauliSum> {
    let l = spec.ring_len;
    let mut sum = PauliSum::new(sites);
    for i in 0..l {
        let k = (i + 1) % l;
        match spec.model {
            Model::SunburstIsing => {
                sum.push(-spec.hopping, &[(i, Pauli::X), (k, Pauli::X)])?;
                sum.push(-fields[i], &[(i, Pauli::Z)])?;
            }
            Model::SunburstXXZ => {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    sum.push(spec.hopping, &[(i, p), (k, p)])?;
                }
                sum.push(fields[i], &[(i, Pauli::Z)])?;
            }
        }
    }
    Ok(sum)
}

fn qubit_terms(spec: &HamiltonianSpec, offset: usize, sites: usize) -> Result<PauliSum> {
    let mut sum = PauliSum::new(sites);
    for j in 0..spec.qubits {
        sum.push(-0.5 * spec.delta, &[(offset + j, Pauli::Z)])?;
    }
    Ok(sum)
}

fn coupling_terms(spec: &HamiltonianSpec) -> Result<PauliSum> {
    let sites = spec.total_sites();
    let mut sum = PauliSum::new(sites);
    for j in 0..spec.qubits {
        sum.push(-spec.kappa, &[(spec.qubit_anchor(j), Pauli::X), (spec.ring_len + j, Pauli::X)])?;
    }
    Ok(sum)
}

fn check_fields(spec: &HamiltonianSpec, fields: &[f64]) -> Result<()> {
    spec.validate()?;
    if fields.len() != spec.ring_len {
        return Err(Error::arg(format!(
            "expected {} ring fields, got {}",
            spec.ring_len,
            fields.len()
        )));
    }
    if fields.iter().any(|f| !f.is_finite()) {
        return Err(Error::arg("ring fields must be finite"));
    }
    Ok(())
}

/// Full model as a Pauli sum: ring ⊗ 1 + 1 ⊗ qubits + coupling.
pub fn sunburst_terms(spec: &HamiltonianSpec, fields: &[f64]) -> Result<PauliSum> {
    check_fields(spec, fields)?;
    let sites = spec.total_sites();
    let mut sum = ring_terms(spec, fields, sites)?;
    sum.extend(qubit_terms(spec, spec.ring_len, sites)?);
    sum.extend(coupling_terms(spec)?);
    Ok(sum)
}

/// Transverse-field Ising sunburst Hamiltonian with per-site fields `h_i`.
pub fn build_sunburst(spec: &HamiltonianSpec, h_realization: &[f64]) -> Result<HermitianOperator> {
    if spec.model != Model::SunburstIsing {
        return Err(Error::arg("build_sunburst needs model SunburstIsing"));
    }
    sunburst_terms(spec, h_realization)?.to_operator()
}

/// XXZ-ring sunburst Hamiltonian with disorder fields `W_i ∈ [-D, D]`.
pub fn build_xxz_sunburst(spec: &HamiltonianSpec, w_realization: &[f64]) -> Result<HermitianOperator> {
    if spec.model != Model::SunburstXXZ {
        return Err(Error::arg("build_xxz_sunburst needs model SunburstXXZ"));
    }
    if let Some(w) = w_realization.iter().find(|w| w.abs() > spec.disorder) {
        return Err(Error::arg(format!("disorder field {w} outside [-D, D] with D = {}", spec.disorder)));
    }
    sunburst_terms(spec, w_realization)?.to_operator()
}

/// Dispatches on `spec.model`.
pub fn build_hamiltonian(spec: &HamiltonianSpec, fields: &[f64]) -> Result<HermitianOperator> {
    match spec.model {
        Model::SunburstIsing => build_sunburst(spec, fields),
        Model::SunburstXXZ => build_xxz_sunburst(spec, fields),
    }
}

/// Ring Hamiltonian alone on its `L` sites.
pub fn build_ring(spec: &HamiltonianSpec, fields: &[f64]) -> Result<HermitianOperator> {
    check_fields(spec, fields)?;
    ring_terms(spec, fields, spec.ring_len)?.to_operator()
}

/// Qubit Hamiltonian `-δ/2 Σ Σᶻ` alone on its `n` sites.
pub fn build_qubits(spec: &HamiltonianSpec) -> Result<HermitianOperator> {
    spec.validate()?;
    qubit_terms(spec, 0, spec.qubits)?.to_operator()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        C::new(re, 0.0)
    }

    #[test]
    fn kron_embed_single_site_z() {
        let m = kron_embed(&Pauli::Z.matrix(), 0, 1).unwrap();
        assert_eq!(m, ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]));
    }

    #[test]
    fn kron_embed_identity_is_identity() {
        for k in 1..5 {
            for site in 0..k {
                let m = kron_embed(&Pauli::I.matrix(), site, k).unwrap();
                assert_eq!(m, ComplexMatrix::identity(1 << k, 1 << k));
            }
        }
    }

    #[test]
    fn kron_embed_x_on_second_slot_flips_low_bit() {
        // |ab⟩ has index 2a + b; σˣ on slot 1 maps |ab⟩ to |a(1-b)⟩.
        let m = kron_embed(&Pauli::X.matrix(), 1, 2).unwrap();
        let expected_image = [1usize, 0, 3, 2];
        for (col, &row) in expected_image.iter().enumerate() {
            for r in 0..4 {
                let want = if r == row { 1.0 } else { 0.0 };
                assert_eq!(m[(r, col)], c(want), "column {col}");
            }
        }
    }

    #[test]
    fn kron_embed_rejects_out_of_range_site() {
        assert!(matches!(kron_embed(&Pauli::X.matrix(), 3, 3), Err(Error::Argument(_))));
    }

    #[test]
    fn only_qubit_term_survives() {
        let spec = HamiltonianSpec::ising(3, 1, 1).with_hopping(0.0).with_h(0.0).with_delta(1.0);
        let h = build_sunburst(&spec, &[0.0; 3]).unwrap();
        let mut diag: Vec<f64> = h.matrix().diagonal().iter().copied().collect();
        diag.sort_by(f64::total_cmp);
        assert_eq!(&diag[..8], &[-0.5; 8]);
        assert_eq!(&diag[8..], &[0.5; 8]);
        assert_eq!(h.matrix().amax(), 0.5);
    }

    #[test]
    fn pauli_y_pair_matches_dense_product() {
        let sites = 2;
        let mut sum = PauliSum::new(sites);
        sum.push(1.0, &[(0, Pauli::Y), (1, Pauli::Y)]).unwrap();
        let fast = sum.to_operator().unwrap();
        let y0 = kron_embed(&Pauli::Y.matrix(), 0, sites).unwrap();
        let y1 = kron_embed(&Pauli::Y.matrix(), 1, sites).unwrap();
        let dense = HermitianOperator::from_complex(&(y0 * y1)).unwrap();
        assert_eq!(fast, dense);
    }

    #[test]
    fn odd_y_strings_are_rejected() {
        let mut sum = PauliSum::new(2);
        assert!(sum.push(1.0, &[(0, Pauli::Y), (1, Pauli::X)]).is_err());
    }

    #[test]
    fn trace_vanishes_for_traceless_strings() {
        let spec = HamiltonianSpec::ising(9, 3, 3).with_h(0.95).with_kappa(1.0);
        let h = build_sunburst(&spec, &spec.ring_fields(0)).unwrap();
        assert!(h.trace().abs() < 1e-10);
    }

    #[test]
    fn spec_validation() {
        assert!(HamiltonianSpec::ising(2, 1, 1).validate().is_err());
        assert!(HamiltonianSpec::ising(4, 3, 2).validate().is_err());
        assert!(HamiltonianSpec::ising(4, 0, 1).validate().is_err());
        assert!(HamiltonianSpec::ising(4, 2, 2).with_kappa(-1.0).validate().is_err());
        assert!(HamiltonianSpec::ising(4, 2, 2).with_delta(f64::NAN).validate().is_err());
        assert!(HamiltonianSpec::ising(4, 2, 2).validate().is_ok());
        let big = HamiltonianSpec::ising(14, 1, 1);
        assert!(matches!(big.validate(), Err(Error::Resource(_))));
    }

    #[test]
    fn wrong_model_or_field_count_is_rejected() {
        let spec = HamiltonianSpec::ising(3, 1, 1);
        assert!(build_xxz_sunburst(&spec, &[0.0; 3]).is_err());
        assert!(build_sunburst(&spec, &[0.0; 2]).is_err());
        let xxz = HamiltonianSpec::xxz(3, 1, 1, 1.0);
        assert!(build_xxz_sunburst(&xxz, &[0.0, 2.0, 0.0]).is_err());
    }

    #[test]
    fn disorder_draws_are_reproducible_and_in_range() {
        let spec = HamiltonianSpec::ising(9, 3, 3)
            .with_field(TransverseField::Interval([0.8, 1.0]))
            .with_seed(42);
        let a = spec.ring_fields(3);
        assert_eq!(a, spec.ring_fields(3));
        assert_ne!(a, spec.ring_fields(4));
        assert!(a.iter().all(|h| (0.8..=1.0).contains(h)));
        let xxz = HamiltonianSpec::xxz(9, 3, 3, 4.0).with_seed(1);
        assert!(xxz.ring_fields(0).iter().all(|w| w.abs() <= 4.0));
    }

    #[test]
    fn spec_json_uses_symbol_names() {
        let json = r#"{"model":"ising","L":9,"n":3,"b":3,"J":1.0,"h":[0.8,1.0],
                       "delta":1.0,"kappa":0.5,"D":0.0,"seed":7}"#;
        let spec: HamiltonianSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.ring_len, 9);
        assert_eq!(spec.field, TransverseField::Interval([0.8, 1.0]));
        let back: HamiltonianSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let uniform: HamiltonianSpec =
            serde_json::from_str(r#"{"model":"SunburstXXZ","L":4,"n":1,"h":0.3,"delta":1,"kappa":1,"D":4}"#)
                .unwrap();
        assert_eq!(uniform.field, TransverseField::Uniform(0.3));
        assert_eq!(uniform.spacing, 1);
    }

    #[test]
    fn layout_split_index() {
        let std = SiteLayout::standard(3, 2);
        assert!(std.is_standard());
        assert_eq!(std.split_index(0b101_10), (0b101, 0b10));
        let swapped = SiteLayout::new(vec![1], vec![0]).unwrap();
        assert_eq!(swapped.split_index(0b10), (0, 1));
        assert!(SiteLayout::new(vec![0, 0], vec![1]).is_err());
    }

    #[test]
    fn parity_dense_form() {
        let p = build_parity(1, 0).unwrap().to_operator();
        assert_eq!(p.matrix(), &Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
    }
}
