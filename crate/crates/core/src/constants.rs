// SPDX-License-Identifier: Apache-2.0

//! Closed-form constants of the weighted Doob bounds.
//!
//! * `ψ(p) = p^{1/(p−1)}`, the extra factor of the bound `ψ(p)·p′·[v]^{1/(p−1)}`.
//! * `φ(a) = a²·η(a)^{p′−1}` with `η(a) = a/(a−1)`, the principal-set factor,
//!   minimized over `a > 1` at `a₀ = (2p−1)/(2p−2)`.
//! * `φ(p) = φ(a₀) = ((2p−1)/(2p−2))²·(2p−1)^{1/(p−1)}`.
//!
//! Powers with exponent `1/(p−1)` are evaluated as `exp(ln_1p(·)/(p−1))` so
//! they stay finite and accurate as `p → 1+`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest `p − 1` accepted by the closed forms.
pub const MIN_P_MINUS_ONE: f64 = 1e-12;

fn check_p(p: f64) -> Result<f64> {
    if !(p.is_finite() && p - 1.0 >= MIN_P_MINUS_ONE) {
        return Err(Error::InvalidExponent(p));
    }
    Ok(p - 1.0)
}

fn check_a(a: f64) -> Result<()> {
    if !(a.is_finite() && a > 1.0) {
        return Err(Error::InvalidBase {
            name: "a",
            value: a,
        });
    }
    Ok(())
}

/// `p′ = p/(p−1)`.
pub fn conjugate(p: f64) -> Result<f64> {
    Ok(p / check_p(p)?)
}

/// `ψ(p) = p^{1/(p−1)}`.
pub fn psi(p: f64) -> Result<f64> {
    let q = check_p(p)?;
    Ok((q.ln_1p() / q).exp())
}

/// `φ₁(p) = (1 + 1/(2p−2))²`.
pub fn phi1(p: f64) -> Result<f64> {
    let q = check_p(p)?;
    Ok((1.0 + 1.0 / (2.0 * q)).powi(2))
}

/// `φ₂(p) = (2p−1)^{1/(p−1)}`.
pub fn phi2(p: f64) -> Result<f64> {
    let q = check_p(p)?;
    Ok(((2.0 * q).ln_1p() / q).exp())
}

/// `φ(p) = φ₁(p)·φ₂(p)`.
pub fn phi(p: f64) -> Result<f64> {
    Ok(phi1(p)? * phi2(p)?)
}

/// The minimizer `a₀ = (2p−1)/(2p−2)`.
pub fn a0(p: f64) -> Result<f64> {
    let q = check_p(p)?;
    Ok(1.0 + 1.0 / (2.0 * q))
}

/// `η(a) = a/(a−1)`.
pub fn eta(a: f64) -> Result<f64> {
    check_a(a)?;
    Ok(a / (a - 1.0))
}

/// `φ(a) = a²·η(a)^{p′−1}`.
pub fn principal_factor(a: f64, p: f64) -> Result<f64> {
    let q = check_p(p)?;
    Ok(a * a * (eta(a)?.ln() / q).exp())
}

/// `a²·η(a)^{p′−1}·p′`, the constant of the principal-set route.
pub fn bound_principal(a: f64, p: f64) -> Result<f64> {
    Ok(principal_factor(a, p)? * conjugate(p)?)
}

/// `ψ(p)·p′`, the constant shared by the pointwise-domination and
/// stopping-time routes.
pub fn bound_lerner(p: f64) -> Result<f64> {
    Ok(psi(p)? * conjugate(p)?)
}

/// `ψ(p)·p′·[v]^{1/(p−1)}`.
pub fn weighted_upper_constant(p: f64, ap: f64) -> Result<f64> {
    let q = check_p(p)?;
    Ok(bound_lerner(p)? * ap.powf(1.0 / q))
}

/// All constants at a given exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantProfile {
    pub p: f64,
    pub p_conj: f64,
    pub psi: f64,
    pub phi: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub a0: f64,
    pub eta_a0: f64,
    pub bound_lerner: f64,
    pub bound_principal_a0: f64,
    pub unweighted: f64,
}

impl ConstantProfile {
    pub fn eta(&self, a: f64) -> Result<f64> {
        eta(a)
    }

    pub fn bound_principal(&self, a: f64) -> Result<f64> {
        bound_principal(a, self.p)
    }
}

pub fn profile(p: f64) -> Result<ConstantProfile> {
    let a0 = a0(p)?;
    let p_conj = conjugate(p)?;
    Ok(ConstantProfile {
        p,
        p_conj,
        psi: psi(p)?,
        phi: phi(p)?,
        phi1: phi1(p)?,
        phi2: phi2(p)?,
        a0,
        eta_a0: eta(a0)?,
        bound_lerner: bound_lerner(p)?,
        bound_principal_a0: bound_principal(a0, p)?,
        unweighted: p_conj,
    })
}

/// `samples` points from `min` to `max` with constant ratio.
pub fn geometric_grid(min: f64, max: f64, samples: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min > 0.0 && min < max) {
        return Err(Error::InvalidRange(format!(
            "need 0 < min < max, got [{min}, {max}]"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidRange(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let ratio = (max / min).ln() / (samples - 1) as f64;
    let mut grid: Vec<f64> = (0..samples)
        .map(|i| min * (ratio * i as f64).exp())
        .collect();
    grid[samples - 1] = max;
    Ok(grid)
}

/// Outcome of a single named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizerReport {
    pub p: f64,
    pub a0: f64,
    pub phi_a0: f64,
    /// `(a, φ(a))` per grid point.
    pub rows: Vec<(f64, f64)>,
    /// Grid points with `φ(a) < φ(a₀)`.
    pub violations: Vec<f64>,
}

impl MinimizerReport {
    pub fn passed(&self) -> bool {
        self.a0 > 1.0 && self.violations.is_empty()
    }
}

/// Checks `φ(a) ≥ φ(a₀)` at every grid point and `a₀ > 1`.
pub fn verify_minimizer(p: f64, grid: &[f64]) -> Result<MinimizerReport> {
    if grid.is_empty() {
        return Err(Error::InvalidRange("empty grid".into()));
    }
    let a0 = a0(p)?;
    let phi_a0 = principal_factor(a0, p)?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut violations = Vec::new();
    for &a in grid {
        let value = principal_factor(a, p)?;
        // Equality at a₀ itself; elsewhere the minimum is strict.
        if value < phi_a0 * (1.0 - 1e-14) {
            violations.push(a);
        }
        rows.push((a, value));
    }
    Ok(MinimizerReport {
        p,
        a0,
        phi_a0,
        rows,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub checks: Vec<Check>,
}

impl ConstantsReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Upper bound on `ln φ(p)/ln ψ(p)` for large `p`: `1 + (1 + ln 2)/ln p`.
pub fn ratio_bound(p: f64) -> f64 {
    1.0 + (1.0 + std::f64::consts::LN_2) / p.ln()
}

/// `ln φ(p)/ln ψ(p)`.
pub fn log_ratio(p: f64) -> Result<f64> {
    Ok(phi(p)?.ln() / psi(p)?.ln())
}

/// Monotonicity, ordering and limit behaviour of `φ` and `ψ` on a geometric
/// grid over `[p_min, p_max]`.
pub fn verify_monotonicity_and_limits(
    p_min: f64,
    p_max: f64,
    samples: usize,
) -> Result<ConstantsReport> {
    let grid = geometric_grid(p_min, p_max, samples)?;
    let phis = grid.iter().map(|&p| phi(p)).collect::<Result<Vec<_>>>()?;
    let psis = grid.iter().map(|&p| psi(p)).collect::<Result<Vec<_>>>()?;
    let phi2s = grid.iter().map(|&p| phi2(p)).collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();

    let first_increase = |values: &[f64]| values.windows(2).position(|w| w[1] >= w[0]);
    for (name, values) in [
        ("phi strictly decreasing", &phis),
        ("psi strictly decreasing", &psis),
        ("phi2 strictly decreasing", &phi2s),
    ] {
        let bad = first_increase(values);
        checks.push(Check::new(
            name,
            bad.is_none(),
            match bad {
                None => format!("{} grid points", values.len()),
                Some(i) => format!("increase between p={} and p={}", grid[i], grid[i + 1]),
            },
        ));
    }

    let bad = grid
        .iter()
        .zip(phis.iter().zip(&psis))
        .find(|(_, (f, s))| f < s);
    checks.push(Check::new(
        "phi >= psi",
        bad.is_none(),
        bad.map_or_else(String::new, |(p, (f, s))| {
            format!("p={p}: phi={f} < psi={s}")
        }),
    ));

    // ln(2p−1) > 2(p−1)/(2p−1), the inequality behind φ₂'s monotonicity.
    let bad = grid
        .iter()
        .find(|&&p| (2.0 * (p - 1.0)).ln_1p() <= 2.0 * (p - 1.0) / (2.0 * p - 1.0));
    checks.push(Check::new(
        "ln(2p-1) > 2(p-1)/(2p-1)",
        bad.is_none(),
        bad.map_or_else(String::new, |p| format!("fails at p={p}")),
    ));

    let near_one = psi(1.0 + 1e-8)?;
    checks.push(Check::new(
        "psi(1+1e-8) ~ e",
        (near_one - std::f64::consts::E).abs() <= 1e-6,
        format!("psi={near_one}"),
    ));
    let near_one_phi = phi(1.0 + 1e-8)?;
    checks.push(Check::new(
        "phi(1+1e-8) large",
        near_one_phi > 1e6 || near_one_phi.is_infinite(),
        format!("phi={near_one_phi}"),
    ));
    let far = phi(1e6)?;
    checks.push(Check::new(
        "phi(1e6) ~ 1",
        (far - 1.0).abs() <= 1e-4,
        format!("phi={far}"),
    ));
    let far_psi = psi(1e6)?;
    checks.push(Check::new(
        "psi(1e6) ~ 1",
        (far_psi - 1.0).abs() <= 1e-4,
        format!("psi={far_psi}"),
    ));

    let tail: Vec<f64> = grid.iter().copied().filter(|&p| p >= 100.0).collect();
    let ratios = tail
        .iter()
        .map(|&p| log_ratio(p))
        .collect::<Result<Vec<_>>>()?;
    let bad = tail
        .iter()
        .zip(&ratios)
        .find(|(p, r)| !(**r > 1.0 && **r <= ratio_bound(**p)));
    checks.push(Check::new(
        "ln phi / ln psi in (1, 1 + (1+ln2)/ln p] for p >= 100",
        bad.is_none(),
        bad.map_or_else(
            || format!("{} grid points", tail.len()),
            |(p, r)| format!("p={p}: ratio={r}, bound={}", ratio_bound(*p)),
        ),
    ));
    let bad = ratios.windows(2).position(|w| w[1] >= w[0]);
    checks.push(Check::new(
        "ln phi / ln psi decreasing for p >= 100",
        bad.is_none(),
        bad.map_or_else(String::new, |i| format!("increase after p={}", tail[i])),
    ));

    Ok(ConstantsReport { checks })
}

/// One row of the `φ`/`ψ` comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure1Row {
    pub p: f64,
    pub phi: f64,
    pub psi: f64,
}

/// `(p, φ(p), ψ(p))` on a geometric grid.
pub fn figure1_data(p_min: f64, p_max: f64, samples: usize) -> Result<Vec<Figure1Row>> {
    check_p(p_min)?;
    geometric_grid(p_min, p_max, samples)?
        .into_iter()
        .map(|p| {
            Ok(Figure1Row {
                p,
                phi: phi(p)?,
                psi: psi(p)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn profile_at_two() {
        let c = profile(2.0).unwrap();
        assert!((c.psi - 2.0).abs() < 1e-12);
        assert!((c.phi - 6.75).abs() < 1e-12);
        assert_eq!(c.a0, 1.5);
        assert!((c.bound_lerner - 4.0).abs() < 1e-12);
        assert_eq!(c.unweighted, 2.0);
        assert!((c.eta_a0 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn limits() {
        assert!((psi(1.0 + 1e-8).unwrap() - std::f64::consts::E).abs() < 1e-6);
        assert!(phi(1.0 + 1e-6).unwrap() > 1e12);
        assert!((psi(1e8).unwrap() - 1.0).abs() < 1e-6);
        assert!((phi(1e8).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_p_at_or_below_one() {
        for p in [1.0, 0.5, 1.0 + 1e-14, f64::NAN] {
            assert!(profile(p).is_err(), "{p}");
        }
        assert!(eta(1.0).is_err());
    }

    #[test]
    fn minimizer_on_coarse_grid() {
        let grid = [1.1, 1.3, 1.5, 2.0, 3.0, 10.0];
        let report = verify_minimizer(2.0, &grid).unwrap();
        assert!(report.passed());
        let best = report
            .rows
            .iter()
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        assert_eq!(best.0, 1.5);
        assert_eq!(best.1, report.phi_a0);
        assert!(verify_minimizer(2.0, &[]).is_err());
        assert!(verify_minimizer(2.0, &[1.0]).is_err());
    }

    #[test]
    fn psi_examples() {
        assert!(psi(2.0).unwrap() > psi(3.0).unwrap());
        assert!((psi(3.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn log_ratio_at_ten_thousand() {
        let r = log_ratio(1e4).unwrap();
        assert!(r > 1.0 && r <= 1.2, "{r}");
        assert!(r <= ratio_bound(1e4));
    }

    #[test]
    fn monotonicity_suite() {
        let report = verify_monotonicity_and_limits(1.01, 1e6, 400).unwrap();
        assert!(report.passed(), "{:?}", report.first_failure());
    }

    #[test]
    fn figure1_rows() {
        let rows = figure1_data(2.0, 10.0, 5).unwrap();
        assert_eq!(rows[0].p, 2.0);
        assert!((rows[0].phi - 6.75).abs() < 1e-12);
        assert!((rows[0].psi - 2.0).abs() < 1e-12);
        let rows = figure1_data(1.1, 10.0, 200).unwrap();
        assert_eq!(rows.len(), 200);
        assert!(rows[0].phi > rows[0].psi);
        assert!(rows
            .windows(2)
            .all(|w| w[1].phi < w[0].phi && w[1].psi < w[0].psi));
        assert!(figure1_data(1.0, 10.0, 5).is_err());
        assert!(figure1_data(3.0, 2.0, 5).is_err());
        assert!(figure1_data(1.5, 2.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn a0_is_the_minimizer(p in 1.01f64..20.0, a in 1.0001f64..50.0) {
            let best = principal_factor(a0(p).unwrap(), p).unwrap();
            prop_assert!(principal_factor(a, p).unwrap() >= best * (1.0 - 1e-14));
        }

        #[test]
        fn principal_factor_at_a0_is_phi(p in 1.001f64..1e4) {
            let lhs = principal_factor(a0(p).unwrap(), p).unwrap();
            let rhs = phi(p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }

        #[test]
        fn principal_route_never_beats_lerner(p in 1.001f64..1e4) {
            let c = profile(p).unwrap();
            prop_assert!(c.phi >= c.psi);
            prop_assert!(c.bound_principal_a0 >= c.bound_lerner);
        }
    }
}
