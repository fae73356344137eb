//! Eigendecomposition, parity-sector resolution and spacing-ratio statistics.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::operators::{sunburst_terms, HamiltonianSpec, HermitianOperator, ParityOperator, PauliSum};
use crate::scalar::Scalar;
use crate::{Error, Matrix, Result};

/// Threshold on `|⟨v|P|v⟩|` for assigning an eigenvector to a sector.
pub const SECTOR_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    Even,
    Odd,
    Unresolved,
}

impl Sector {
    pub fn sign(self) -> Option<i8> {
        match self {
            Sector::Even => Some(1),
            Sector::Odd => Some(-1),
            Sector::Unresolved => None,
        }
    }

    pub fn from_sign(sign: i8) -> Self {
        if sign > 0 {
            Sector::Even
        } else {
            Sector::Odd
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sector::Even => f.write_str("+1"),
            Sector::Odd => f.write_str("-1"),
            Sector::Unresolved => f.write_str("unresolved"),
        }
    }
}

/// Eigenvalues in ascending order with eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
    pub sector: Sector,
    /// Parity of each level, when known.
    pub level_parity: Option<Vec<i8>>,
}

impl Spectrum {
    /// Hilbert-space dimension (length of each eigenvector).
    pub fn dim(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// Number of levels.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `max |E|`, floored at one.
    pub fn energy_scale(&self) -> f64 {
        self.eigenvalues.iter().fold(1.0f64, |m, e| m.max(e.abs()))
    }

    /// `max_k max_i |(H v_k - E_k v_k)_i|`.
    pub fn residual(&self, h: &HermitianOperator) -> f64 {
        let hv = h.matrix() * &self.eigenvectors;
        let mut worst = 0.0f64;
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            for i in 0..self.dim() {
                worst = worst.max((hv[(i, k)] - e * self.eigenvectors[(i, k)]).abs());
            }
        }
        worst
    }

    /// `max |V†V - 1|`.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        (g - Matrix::identity(self.len(), self.len())).amax()
    }

    /// `V diag(E) V†`.
    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.eigenvectors.clone();
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(e);
        }
        scaled * self.eigenvectors.transpose()
    }

    /// Eigenvalues of the levels with parity `sign`, ascending.
    pub fn sector_levels(&self, sign: i8) -> Option<Vec<f64>> {
        let labels = self.level_parity.as_ref()?;
        Some(
            self.eigenvalues
                .iter()
                .zip(labels)
                .filter(|(_, &p)| p == sign)
                .map(|(&e, _)| e)
                .collect(),
        )
    }

    fn select(&self, columns: &[usize], sector: Sector) -> Spectrum {
        Spectrum {
            eigenvalues: columns.iter().map(|&k| self.eigenvalues[k]).collect(),
            eigenvectors: self.eigenvectors.select_columns(columns),
            sector,
            level_parity: self
                .level_parity
                .as_ref()
                .map(|l| columns.iter().map(|&k| l[k]).collect()),
        }
    }
}

/// Full eigendecomposition of a Hermitian operator.
pub fn eigendecompose(h: &HermitianOperator) -> Result<Spectrum> {
    let res = h.hermiticity_residual();
    if res > 1e-12 * h.scale() {
        return Err(Error::arg(format!("operator is not Hermitian (residual {res:e})")));
    }
    let (eigenvalues, eigenvectors) = linalg::symmetric_eigen(h.matrix().clone())?;
    Ok(Spectrum { eigenvalues, eigenvectors, sector: Sector::Unresolved, level_parity: None })
}

fn check_commutes(h: &HermitianOperator, p: &ParityOperator) -> Result<()> {
    if h.dim() != p.dim() {
        return Err(Error::arg("operator and parity dimensions differ"));
    }
    let res = p.commutator_residual(h);
    if res > 1e-12 * h.scale() {
        return Err(Error::arg(format!("operator does not commute with parity (residual {res:e})")));
    }
    Ok(())
}

/// Restriction of `h` to the parity-`sign` sector, in ascending basis order.
pub fn sector_block(h: &HermitianOperator, p: &ParityOperator, sign: i8) -> Result<HermitianOperator> {
    check_commutes(h, p)?;
    let idx = p.sector_indices(sign);
    HermitianOperator::from_matrix(h.matrix().select_rows(&idx).select_columns(&idx))
}

/// Eigendecomposition through the two parity blocks.
///
/// The blocks are diagonalized separately and the eigenvectors embedded back
/// into the full space, so every level carries an exact parity label even
/// inside degenerate multiplets.
pub fn eigendecompose_by_parity(h: &HermitianOperator, p: &ParityOperator) -> Result<Spectrum> {
    check_commutes(h, p)?;
    let dim = h.dim();
    let mut levels: Vec<(f64, i8, usize, usize)> = Vec::with_capacity(dim);
    let mut blocks = Vec::with_capacity(2);
    for sign in [1i8, -1] {
        let idx = p.sector_indices(sign);
        let block = h.matrix().select_rows(&idx).select_columns(&idx);
        let (values, vectors) = linalg::symmetric_eigen(block)?;
        let b = blocks.len();
        levels.extend(values.iter().enumerate().map(|(k, &e)| (e, sign, b, k)));
        blocks.push((idx, vectors));
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut eigenvectors = Matrix::zeros(dim, dim);
    for (col, &(_, _, b, k)) in levels.iter().enumerate() {
        let (idx, vectors) = &blocks[b];
        for (r, &i) in idx.iter().enumerate() {
            eigenvectors[(i, col)] = vectors[(r, k)];
        }
    }
    Ok(Spectrum {
        eigenvalues: levels.iter().map(|l| l.0).collect(),
        eigenvectors,
        sector: Sector::Unresolved,
        level_parity: Some(levels.iter().map(|l| l.1).collect()),
    })
}

/// Eigenvalues of one parity block, ascending.
pub fn sector_eigenvalues(h: &HermitianOperator, p: &ParityOperator, sign: i8) -> Result<Vec<f64>> {
    linalg::symmetric_eigenvalues(sector_block(h, p, sign)?.into_matrix())
}

/// Splits a spectrum into its parity `+1` and `-1` parts.
///
/// Near-degenerate clusters are first rotated into eigenvectors of `P`
/// restricted to the cluster, so a degenerate pair straddling both sectors
/// is separated rather than rejected.
pub fn parity_sectors(spectrum: &Spectrum, p: &ParityOperator) -> Result<(Spectrum, Spectrum)> {
    if spectrum.dim() != p.dim() {
        return Err(Error::arg("spectrum and parity dimensions differ"));
    }
    let mut work = spectrum.clone();
    let tol = 1e-8 * spectrum.energy_scale();
    let mut start = 0;
    while start < work.len() {
        let mut end = start + 1;
        while end < work.len() && work.eigenvalues[end] - work.eigenvalues[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            rotate_cluster(&mut work.eigenvectors, start, end, p)?;
        }
        start = end;
    }
    let mut labels = Vec::with_capacity(work.len());
    for k in 0..work.len() {
        let x = p.expectation_real(work.eigenvectors.column(k).iter().copied());
        if x.abs() <= SECTOR_THRESHOLD {
            return Err(Error::Degeneracy(format!(
                "level {k} (E = {}) has ⟨P⟩ = {x:.4} after re-rotation",
                work.eigenvalues[k]
            )));
        }
        labels.push(if x > 0.0 { 1i8 } else { -1 });
    }
    let even: Vec<usize> = (0..labels.len()).filter(|&k| labels[k] > 0).collect();
    let odd: Vec<usize> = (0..labels.len()).filter(|&k| labels[k] < 0).collect();
    work.level_parity = Some(labels);
    Ok((work.select(&even, Sector::Even), work.select(&odd, Sector::Odd)))
}

fn rotate_cluster(vectors: &mut Matrix, start: usize, end: usize, p: &ParityOperator) -> Result<()> {
    let k = end - start;
    let cluster = vectors.columns(start, k).into_owned();
    let mut projected = Matrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let v: f64 = (0..cluster.nrows())
                .map(|i| p.sign(i) * cluster[(i, a)] * cluster[(i, b)])
                .sum();
            projected[(a, b)] = v;
            projected[(b, a)] = v;
        }
    }
    let (_, rotation) = linalg::symmetric_eigen(projected)?;
    let rotated = cluster * rotation;
    vectors.columns_mut(start, k).copy_from(&rotated);
    Ok(())
}

/// Nearest-neighbour spacing ratios of an ascending level sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioStatistics<T> {
    pub ratios: Vec<T>,
    pub mean: T,
    /// Number of exactly zero spacings.
    pub degeneracies: usize,
}

/// `r_n = min(s_n, s_{n-1}) / max(s_n, s_{n-1})` with `s_n = E_{n+1} - E_n`.
///
/// A ratio whose larger spacing is zero (an exact triple degeneracy) is
/// reported as 0, keeping the estimator total.
pub fn spacing_ratios<T: Scalar>(levels: &[T]) -> Result<RatioStatistics<T>> {
    if levels.len() < 3 {
        return Err(Error::arg(format!("need at least 3 levels, got {}", levels.len())));
    }
    if levels.iter().any(|e| !e.is_finite()) {
        return Err(Error::arg("levels must be finite"));
    }
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::arg("levels must be sorted ascending"));
    }
    let spacings: Vec<T> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let degeneracies = spacings.iter().filter(|s| s.is_zero()).count();
    let ratios: Vec<T> = spacings
        .windows(2)
        .map(|w| {
            let (lo, hi) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
            if hi.is_zero() {
                T::zero()
            } else {
                lo / hi
            }
        })
        .collect();
    let mean = ratios.iter().fold(T::zero(), |acc, &r| acc + r) / T::from_count(ratios.len());
    Ok(RatioStatistics { ratios, mean, degeneracies })
}

/// Drops `floor(fraction * len)` levels from each end of the spectrum.
pub fn trim_edges<T>(levels: &[T], fraction: f64) -> &[T] {
    let cut = ((levels.len() as f64) * fraction.clamp(0.0, 0.5)).floor() as usize;
    &levels[cut..levels.len() - cut]
}

/// Knobs of the spacing-ratio sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub realizations: usize,
    /// Fraction of levels discarded at each spectral edge.
    pub trim_fraction: f64,
    pub sector: Sector,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { realizations: 50, trim_fraction: 0.1, sector: Sector::Even }
    }
}

/// One row of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub kappa: f64,
    pub mean_r: f64,
    pub stderr: f64,
    pub realizations: usize,
    pub sector: Sector,
    pub degeneracies: usize,
}

/// CSV header of [`SweepRow`] tables.
pub const SWEEP_HEADER: &str = "kappa,mean_r,stderr,realizations,sector";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!("{},{:.10},{:.10},{},{}", self.kappa, self.mean_r, self.stderr, self.realizations, self.sector)
    }
}

/// Sector block of the model Hamiltonian built straight from its Pauli
/// terms, without materialising the full matrix.
pub fn sector_hamiltonian(spec: &HamiltonianSpec, fields: &[f64], sign: i8) -> Result<HermitianOperator> {
    let terms = sunburst_terms(spec, fields)?;
    sector_block_from_terms(&terms, sign)
}

fn sector_block_from_terms(terms: &PauliSum, sign: i8) -> Result<HermitianOperator> {
    let dim = 1usize << terms.sites();
    let parity_of = |i: usize| if i.count_ones() % 2 == 0 { 1i8 } else { -1 };
    let idx: Vec<usize> = (0..dim).filter(|&i| parity_of(i) == sign).collect();
    let mut pos = vec![usize::MAX; dim];
    for (k, &i) in idx.iter().enumerate() {
        pos[i] = k;
    }
    let mut m = Matrix::zeros(idx.len(), idx.len());
    for (c, &col) in idx.iter().enumerate() {
        for term in terms.terms() {
            let (row, v) = term.apply(col);
            let r = pos[row];
            if r == usize::MAX {
                return Err(Error::arg("Hamiltonian term does not commute with parity"));
            }
            m[(r, c)] += v;
        }
    }
    HermitianOperator::from_matrix(m)
}

/// Mean spacing ratio for each coupling in `kappa_grid`, averaged over
/// disorder realizations within one parity sector.
///
/// Jobs run in parallel over `(kappa, realization)` pairs and are reduced in
/// grid order, so the table is independent of scheduling.
pub fn rratio_sweep(
    template: &HamiltonianSpec,
    kappa_grid: &[f64],
    options: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    if kappa_grid.is_empty() {
        return Err(Error::arg("kappa grid is empty"));
    }
    if options.realizations == 0 {
        return Err(Error::arg("need at least one realization"));
    }
    let sign = options
        .sector
        .sign()
        .ok_or_else(|| Error::arg("sweep needs a definite parity sector"))?;
    template.validate()?;
    for &k in kappa_grid {
        template.clone().with_kappa(k).validate()?;
    }
    let jobs: Vec<(usize, usize)> = (0..kappa_grid.len())
        .flat_map(|g| (0..options.realizations).map(move |r| (g, r)))
        .collect();
    let results: Vec<Result<RatioStatistics<f64>>> = jobs
        .par_iter()
        .map(|&(g, r)| {
            let spec = template.clone().with_kappa(kappa_grid[g]);
            let fields = spec.ring_fields(r as u64);
            let levels = sector_hamiltonian(&spec, &fields, sign)
                .and_then(|h| linalg::symmetric_eigenvalues(h.into_matrix()))
                .and_then(|e| spacing_ratios(trim_edges(&e, options.trim_fraction)));
            levels.map_err(|e| Error::Realization { index: r, source: Box::new(e) })
        })
        .collect();
    let mut rows = Vec::with_capacity(kappa_grid.len());
    let mut it = results.into_iter();
    for &kappa in kappa_grid {
        let mut means = Vec::with_capacity(options.realizations);
        let mut degeneracies = 0;
        for _ in 0..options.realizations {
            let stats = it.next().expect("one result per job")?;
            degeneracies += stats.degeneracies;
            means.push(stats.mean);
        }
        let (mean_r, stderr) = mean_and_stderr(&means);
        rows.push(SweepRow {
            kappa,
            mean_r,
            stderr,
            realizations: options.realizations,
            sector: options.sector,
            degeneracies,
        });
    }
    Ok(rows)
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_parity, build_sunburst, HamiltonianSpec};

    #[test]
    fn diagonal_operator_sorted() {
        let h = HermitianOperator::diagonal(&[3.0, 1.0, 2.0]);
        let s = eigendecompose(&h).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert!(s.residual(&h) < 1e-14);
    }

    #[test]
    fn single_qubit_levels() {
        let spec = HamiltonianSpec::ising(3, 1, 1).with_delta(1.0);
        let hq = crate::operators::build_qubits(&spec).unwrap();
        let s = eigendecompose(&hq).unwrap();
        assert_eq!(s.eigenvalues, vec![-0.5, 0.5]);
    }

    #[test]
    fn non_symmetric_matrix_is_rejected() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(HermitianOperator::from_matrix(m), Err(Error::Argument(_))));
    }

    #[test]
    fn ratios_of_simple_sequences() {
        let s = spacing_ratios(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.ratios, vec![1.0, 1.0]);
        assert_eq!(s.mean, 1.0);
        let s = spacing_ratios(&[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(s.ratios, vec![0.5]);
        assert!(spacing_ratios(&[0.0, 1.0]).is_err());
        assert!(spacing_ratios(&[0.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn zero_spacings_give_zero_ratio() {
        let s = spacing_ratios(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.ratios, vec![0.0, 0.0]);
        assert_eq!(s.degeneracies, 2);
    }

    #[test]
    fn trimming() {
        let v: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(trim_edges(&v, 0.1), &v[1..9]);
        assert_eq!(trim_edges(&v, 0.0), &v[..]);
    }

    #[test]
    fn parity_as_hamiltonian_splits_in_half() {
        let p = build_parity(3, 1).unwrap();
        let s = eigendecompose(&p.to_operator()).unwrap();
        let (even, odd) = parity_sectors(&s, &p).unwrap();
        assert_eq!((even.len(), odd.len()), (8, 8));
        assert!(even.eigenvalues.iter().all(|&e| e == 1.0));
    }

    #[test]
    fn sectors_reassemble_full_spectrum() {
        let spec = HamiltonianSpec::ising(4, 2, 2).with_h(0.7).with_kappa(0.6);
        let h = build_sunburst(&spec, &spec.ring_fields(0)).unwrap();
        let p = build_parity(4, 2).unwrap();
        let full = eigendecompose(&h).unwrap();
        let (even, odd) = parity_sectors(&full, &p).unwrap();
        let mut merged: Vec<f64> = even.eigenvalues.iter().chain(&odd.eigenvalues).copied().collect();
        merged.sort_by(f64::total_cmp);
        for (a, b) in merged.iter().zip(&full.eigenvalues) {
            assert!((a - b).abs() < 1e-10);
        }
        let blocks = eigendecompose_by_parity(&h, &p).unwrap();
        for (a, b) in blocks.eigenvalues.iter().zip(&full.eigenvalues) {
            assert!((a - b).abs() < 1e-10);
        }
        let direct = sector_eigenvalues(&h, &p, 1).unwrap();
        for (a, b) in direct.iter().zip(&even.eigenvalues) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(blocks.residual(&h) < 1e-10);
        assert!(blocks.unitarity_residual() < 1e-10);
    }

    #[test]
    fn block_from_terms_matches_extracted_block() {
        let spec = HamiltonianSpec::xxz(4, 1, 1, 2.0).with_kappa(0.8).with_seed(3);
        let fields = spec.ring_fields(0);
        let h = crate::operators::build_xxz_sunburst(&spec, &fields).unwrap();
        let p = build_parity(4, 1).unwrap();
        for sign in [1, -1] {
            let a = sector_block(&h, &p, sign).unwrap();
            let b = sector_hamiltonian(&spec, &fields, sign).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn degenerate_pair_straddling_sectors_is_rotated() {
        // H = diag(0, 0, 1, 1) on one qubit pair, P = diag(+1, -1, -1, +1);
        // feed a spectrum whose first two vectors mix sectors.
        let p = build_parity(2, 0).unwrap();
        let s = 0.5f64.sqrt();
        let v = Matrix::from_row_slice(4, 4, &[
            s, s, 0.0, 0.0,
            s, -s, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ]);
        let spectrum = Spectrum {
            eigenvalues: vec![0.0, 0.0, 1.0, 2.0],
            eigenvectors: v,
            sector: Sector::Unresolved,
            level_parity: None,
        };
        let (even, odd) = parity_sectors(&spectrum, &p).unwrap();
        assert_eq!(even.eigenvalues, vec![0.0, 2.0]);
        assert_eq!(odd.eigenvalues, vec![0.0, 1.0]);
    }

    #[test]
    fn unresolvable_mixture_is_reported() {
        let p = build_parity(2, 0).unwrap();
        let s = 0.5f64.sqrt();
        let v = Matrix::from_row_slice(4, 4, &[
            s, s, 0.0, 0.0,
            s, -s, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ]);
        let spectrum = Spectrum {
            eigenvalues: vec![0.0, 0.5, 1.0, 2.0],
            eigenvectors: v,
            sector: Sector::Unresolved,
            level_parity: None,
        };
        assert!(matches!(parity_sectors(&spectrum, &p), Err(Error::Degeneracy(_))));
    }

    #[test]
    fn single_point_sweep_is_reproducible() {
        let spec = HamiltonianSpec::ising(5, 1, 1)
            .with_field(crate::operators::TransverseField::Interval([0.8, 1.0]))
            .with_seed(11);
        let opts = SweepOptions { realizations: 1, ..Default::default() };
        let a = rratio_sweep(&spec, &[0.7], &opts).unwrap();
        let b = rratio_sweep(&spec, &[0.7], &opts).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].mean_r.to_bits(), b[0].mean_r.to_bits());
        assert_eq!(a[0].stderr, 0.0);
        assert!(rratio_sweep(&spec, &[], &opts).is_err());
    }
}
