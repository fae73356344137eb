//! Closed-form predictions for the quench dynamics.
//!
//! All functions are generic over [`Scalar`] and pure, so they double as
//! oracles for the numerics in [`crate::dynamics`].

use num_complex::Complex;

use crate::scalar::Scalar;
use crate::{Error, Result};

/// Which limiting ring regime the single-qubit formulas describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    /// `h ≈ 0`: ring ground state is the ferromagnetic parity doublet.
    WeakField,
    /// `J ≪ h`: ring ground state is the field-polarised state.
    StrongField,
}

/// Effective two-level problem of one qubit coupled to a limiting ring.
///
/// `gap` is the bare splitting of the two coupled product states (`δ` in the
/// weak-field limit, `2h + δ` in the strong-field limit) and
/// `omega = sqrt(gap² + 4κ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitingRegime<T> {
    pub kind: RegimeKind,
    pub kappa: T,
    pub gap: T,
    pub omega: T,
}

impl<T: Scalar> LimitingRegime<T> {
    pub fn weak_field(kappa: T, delta: T) -> Result<Self> {
        Self::new(RegimeKind::WeakField, kappa, delta)
    }

    pub fn strong_field(kappa: T, delta: T, h: T) -> Result<Self> {
        Self::new(RegimeKind::StrongField, kappa, T::lit(2.0) * h + delta)
    }

    fn new(kind: RegimeKind, kappa: T, gap: T) -> Result<Self> {
        let omega = (gap * gap + T::lit(4.0) * kappa * kappa).sqrt();
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::arg("limiting regime needs a positive finite frequency"));
        }
        Ok(LimitingRegime { kind, kappa, gap, omega })
    }

    /// Oscillation period `2π/ω`.
    pub fn period(&self) -> T {
        T::lit(2.0) * T::PI() / self.omega
    }
}

/// Amplitudes `(A(t), B(t))` of the two coupled product states.
pub fn limiting_amplitudes<T: Scalar>(t: T, regime: &LimitingRegime<T>) -> (Complex<T>, Complex<T>) {
    let half = regime.omega * t / T::lit(2.0);
    let (s, c) = half.sin_cos();
    let a = Complex::new(c, regime.gap / regime.omega * s);
    let b = Complex::new(T::zero(), -(T::lit(2.0) * regime.kappa / regime.omega) * s);
    (a, b)
}

/// Linear entropy of the single qubit, `1 - (|A|⁴ + |B|⁴)`.
///
/// The two branches are Schmidt components of the evolved state, so the
/// qubit purity is the sum of fourth powers of their moduli.
pub fn limiting_entropy<T: Scalar>(t: T, regime: &LimitingRegime<T>) -> T {
    let (a, b) = limiting_amplitudes(t, regime);
    let (pa, pb) = (a.norm_sqr(), b.norm_sqr());
    T::one() - (pa * pa + pb * pb)
}

/// First time at which the single-qubit entropy reaches its maximum 1/2,
/// or `None` when `2κ < gap` and the maximum is never attained.
pub fn t_star<T: Scalar>(regime: &LimitingRegime<T>) -> Option<T> {
    let (k, g) = (regime.kappa, regime.gap);
    let four_k2 = T::lit(4.0) * k * k;
    if four_k2 < g * g || k <= T::zero() {
        return None;
    }
    let x = ((four_k2 - g * g) / (T::lit(8.0) * k * k)).sqrt();
    let two_over_omega = T::lit(2.0) / regime.omega;
    [x, -x]
        .into_iter()
        .map(|arg| two_over_omega * arg.max(-T::one()).min(T::one()).acos())
        .filter(|&t| t > T::zero())
        .fold(None, |best: Option<T>, t| Some(best.map_or(t, |b| b.min(t))))
}

/// Coherence of the initial ring state in the small-time formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coherence {
    /// Ring ground state only.
    Incoherent,
    /// Equal-weight superposition of all `2^L` ring eigenstates.
    Maximal,
}

/// Coupling seen by one qubit when `n` qubits share the ring: `√n κ`.
pub fn scaled_coupling<T: Scalar>(kappa: T, n: usize) -> T {
    T::from_count(n).sqrt() * kappa
}

/// Upper end of the window where [`small_time_entropy`] applies:
/// `0.3 / (κ √n)`.
pub fn small_time_window<T: Scalar>(kappa: T, n: usize) -> T {
    T::lit(0.3) / scaled_coupling(kappa, n)
}

/// Short-time linear entropy `¼(1 - cos 4√n κ t)`, times `1 - 2^-L` for the
/// maximally coherent ring state.
pub fn small_time_entropy<T: Scalar>(t: T, kappa: T, n: usize, coherence: Coherence, ring_len: usize) -> T {
    let k = scaled_coupling(kappa, n);
    let base = (T::one() - (T::lit(4.0) * k * t).cos()) / T::lit(4.0);
    match coherence {
        Coherence::Incoherent => base,
        Coherence::Maximal => base * (T::one() - T::lit(2.0).powi(-(ring_len as i32))),
    }
}

/// Leading small-time law `2nκ²t²`.
pub fn quadratic_growth<T: Scalar>(t: T, kappa: T, n: usize) -> T {
    T::lit(2.0) * T::from_count(n) * kappa * kappa * t * t
}

/// Lubkin value `1 - 2^-n`: linear entropy of a maximally mixed `n`-qubit state.
pub fn lubkin_value<T: Scalar>(n: usize) -> T {
    T::one() - T::lit(2.0).powi(-(n as i32))
}

/// Complete growth curve `S∞ (1 - exp(-2nκ²t² / S∞))`.
pub fn full_transition_curve<T: Scalar>(t: T, kappa: T, n: usize, s_inf: T) -> T {
    if s_inf <= T::zero() {
        return T::zero();
    }
    let rate = T::lit(2.0) * T::from_count(n) * kappa * kappa / s_inf;
    s_inf * (T::one() - (-rate * t * t).exp())
}

/// Right-hand side of the growth ODE, `-(4nκ²t / S∞)(S - S∞)`.
pub fn transition_ode_rhs<T: Scalar>(t: T, s: T, kappa: T, n: usize, s_inf: T) -> T {
    -(T::lit(4.0) * T::from_count(n) * kappa * kappa * t / s_inf) * (s - s_inf)
}

/// Minimum number of samples accepted by [`transition_ode_residual`].
pub const MIN_ODE_POINTS: usize = 100;

/// Pointwise residual `dS/dt - rhs(t, S)` of a sampled trace.
///
/// Derivatives use the fourth-order five-point central stencil on a uniform
/// grid, so the first and last two samples carry no residual. Returns
/// `(t, residual)` pairs for the interior points.
pub fn transition_ode_residual<T: Scalar>(
    times: &[T],
    values: &[T],
    kappa: T,
    n: usize,
    s_inf: T,
) -> Result<Vec<(T, T)>> {
    if times.len() != values.len() {
        return Err(Error::arg("times and values differ in length"));
    }
    if times.len() < MIN_ODE_POINTS {
        return Err(Error::arg(format!(
            "grid too coarse: {} points, need at least {MIN_ODE_POINTS}",
            times.len()
        )));
    }
    if !(s_inf > T::zero()) {
        return Err(Error::arg("saturation value must be positive"));
    }
    let step = (times[times.len() - 1] - times[0]) / T::from_count(times.len() - 1);
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= T::lit(1e-6) * step.abs());
    if !(step > T::zero()) || !uniform {
        return Err(Error::arg("ODE residual needs a uniform increasing time grid"));
    }
    let twelve = T::lit(12.0);
    let eight = T::lit(8.0);
    Ok((2..times.len() - 2)
        .map(|i| {
            let d = (values[i - 2] - eight * values[i - 1] + eight * values[i + 1] - values[i + 2])
                / (twelve * step);
            let rhs = transition_ode_rhs(times[i], values[i], kappa, n, s_inf);
            (times[i], d - rhs)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn amplitudes_at_zero_and_quarter_turns() {
        let r = LimitingRegime::weak_field(1.0, 1.0).unwrap();
        let (a, b) = limiting_amplitudes(0.0, &r);
        assert_eq!((a.re, a.im, b.re, b.im), (1.0, 0.0, 0.0, 0.0));

        let r = LimitingRegime::weak_field(0.5, 0.0).unwrap();
        let (a, b) = limiting_amplitudes(PI, &r);
        assert!(a.norm() < 1e-15);
        assert!((b - Complex::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn amplitudes_return_after_full_period() {
        let r = LimitingRegime::weak_field(1.0, 1.0).unwrap();
        assert!((r.omega - 5f64.sqrt()).abs() < 1e-15);
        let (a, b) = limiting_amplitudes(2.0 * PI / 5f64.sqrt(), &r);
        // cos(π) = -1: the state returns up to a global sign.
        assert!((a.norm() - 1.0).abs() < 1e-14 && b.norm() < 1e-14);
    }

    #[test]
    fn amplitudes_stay_normalised() {
        for &(k, d) in &[(1.0, 1.0), (0.4, 1.0), (2.0, 0.3)] {
            let r = LimitingRegime::weak_field(k, d).unwrap();
            for i in 0..50 {
                let (a, b) = limiting_amplitudes(0.17 * i as f64, &r);
                assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn limiting_entropy_is_periodic() {
        let r = LimitingRegime::strong_field(1.0, 1.0, 1.0).unwrap();
        assert!((r.omega - 13f64.sqrt()).abs() < 1e-15);
        let p = r.period();
        for i in 0..100 {
            let t = 0.073 * i as f64;
            assert!((limiting_entropy(t, &r) - limiting_entropy(t + p, &r)).abs() <= 1e-12);
        }
        assert_eq!(limiting_entropy(0.0, &r), 0.0);
    }

    #[test]
    fn t_star_absent_below_threshold() {
        let r = LimitingRegime::weak_field(0.4, 1.0).unwrap();
        assert_eq!(t_star(&r), None);
    }

    #[test]
    fn t_star_at_unit_coupling() {
        // Dense-sampling oracle: first maximum of the entropy on [0, period/2].
        let r = LimitingRegime::weak_field(1.0, 1.0).unwrap();
        let ts = t_star(&r).unwrap();
        let (mut best_t, mut best_s) = (0.0, f64::MIN);
        for i in 0..=200_000 {
            let t = r.period() / 2.0 * i as f64 / 200_000.0;
            let s = limiting_entropy(t, &r);
            if s > best_s + 1e-15 {
                best_s = s;
                best_t = t;
            }
        }
        assert!((best_s - 0.5).abs() < 1e-9);
        assert!((ts - best_t).abs() < 1e-4, "{ts} vs {best_t}");
        assert!((ts - 0.815_48).abs() < 1e-4);
        assert!((limiting_entropy(ts, &r) - best_s).abs() < 1e-9);
    }

    #[test]
    fn t_star_decreases_with_coupling() {
        let t1 = t_star(&LimitingRegime::weak_field(1.0, 1.0).unwrap()).unwrap();
        let t2 = t_star(&LimitingRegime::weak_field(2.0, 1.0).unwrap()).unwrap();
        assert!(t2 < t1);
    }

    #[test]
    fn small_time_entropy_values() {
        assert_eq!(small_time_entropy(0.0, 1.0, 1, Coherence::Incoherent, 9), 0.0);
        let s = small_time_entropy(0.1, 1.0, 1, Coherence::Incoherent, 9);
        assert!((s - 0.25 * (1.0 - 0.4f64.cos())).abs() < 1e-16);
        assert!((s - 0.019_735).abs() < 1e-6 && (s - 0.02).abs() < 0.02 * 0.02);
        for i in 1..20 {
            let t = 0.01 * i as f64;
            let inc = small_time_entropy(t, 1.3, 3, Coherence::Incoherent, 9);
            let max = small_time_entropy(t, 1.3, 3, Coherence::Maximal, 9);
            assert!((max / inc - (1.0 - 1.0 / 512.0)).abs() < 1e-14);
        }
        assert!((small_time_window(1.0, 4) - 0.15f64).abs() < 1e-15);
    }

    #[test]
    fn lubkin_values() {
        assert_eq!(lubkin_value::<f64>(0), 0.0);
        assert_eq!(lubkin_value::<f64>(1), 0.5);
        assert_eq!(lubkin_value::<f64>(3), 0.875);
        assert_eq!(lubkin_value::<f32>(3), 0.875f32);
    }

    #[test]
    fn transition_curve_limits_and_curvature() {
        assert_eq!(full_transition_curve(0.0, 1.5, 3, 0.875), 0.0);
        assert!((full_transition_curve(50.0f64, 1.5, 3, 0.875) - 0.875).abs() < 1e-15);
        // Second derivative at zero by central differences: 4nκ².
        let h = 1e-4;
        let f = |t: f64| full_transition_curve(t, 1.5, 3, 0.875);
        let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        assert!((second - 4.0 * 3.0 * 2.25).abs() < 1e-4);
    }

    #[test]
    fn ode_residual_of_constant_and_exact_curves() {
        let times: Vec<f64> = (0..500).map(|i| i as f64 * 0.01).collect();
        let flat = vec![0.5; times.len()];
        assert!(transition_ode_residual(&times, &flat, 1.0, 1, 0.5)
            .unwrap()
            .iter()
            .all(|&(_, r)| r == 0.0));
        let curve: Vec<f64> = times.iter().map(|&t| full_transition_curve(t, 1.0, 1, 0.5)).collect();
        let worst = transition_ode_residual(&times, &curve, 1.0, 1, 0.5)
            .unwrap()
            .iter()
            .fold(0.0f64, |m, &(_, r)| m.max(r.abs()));
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn ode_residual_rejects_coarse_grid() {
        let times: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert!(transition_ode_residual(&times, &times, 1.0, 1, 0.5).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let r = LimitingRegime::<f32>::weak_field(1.0, 1.0).unwrap();
        let ts = t_star(&r).unwrap();
        assert!((limiting_entropy(ts, &r) - 0.5).abs() < 1e-5);
    }
}
