//! The five scalar conditions on `zeta` for the speed `F = H^p`, with
//! `delta = p/(p+1)` and `c = 1`.
//!
//! [`zeta_conditions`] evaluates them from `F', F'', F'''` and the derivatives
//! of `zeta`; [`zeta_conditions_closed`] uses the closed forms in `(p, n, H)`.

use crate::error::{Error, Result};
use crate::harnack::{first_branch, mean_derivatives, Zeta};
use crate::symfunc::SpeedFunction;

pub const ZETA_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaConditions {
    /// `2 zeta - 2 n delta F'' F^2 / F'`, nonnegative for `p >= (n+1)/(2n)`.
    pub a: f64,
    /// `zeta^2/(delta F) - 2 n F'' F zeta / F' + n (zeta' F - zeta) F'`, same range.
    pub b: f64,
    /// `zeta' F - n F'' F^2 / F' - zeta`, nonnegative for `(n+1)/(2n) <= p <= 1`.
    pub c: f64,
    /// `-F''`
    pub d: f64,
    /// `n (2F''/F' - F''^2 F / F'^3 + F''' F / F'^2) - zeta'' + F/(F' H^2) - 1/H`;
    /// zero when `zeta != 0`, at least zero when `zeta = 0`.
    pub e: f64,
    /// Magnitude of the terms making up `e`.
    pub e_scale: f64,
    pub zeta_nonzero: bool,
}

impl ZetaConditions {
    pub const NAMES: [&'static str; 5] = ["a", "b", "c", "d", "e"];

    pub fn entries(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }

    /// Inequality entries are at least `-tol`, and `e` is zero to `tol`
    /// relative when `zeta != 0`.
    pub fn satisfied(&self) -> bool {
        let ineq = [self.a, self.b, self.c, self.d].iter().all(|&x| x >= -ZETA_TOLERANCE * (1.0 + x.abs()));
        let e_ok = if self.zeta_nonzero {
            self.e.abs() <= ZETA_TOLERANCE * self.e_scale.max(1.0)
        } else {
            self.e >= -ZETA_TOLERANCE * self.e_scale.max(1.0)
        };
        ineq && e_ok
    }

    /// Largest entrywise difference relative to `1 + |entry|`.
    pub fn max_difference(&self, o: &ZetaConditions) -> f64 {
        self.entries()
            .iter()
            .zip(o.entries())
            .map(|(x, y)| (x - y).abs() / (1.0 + x.abs().max(y.abs())))
            .fold(0.0, f64::max)
    }
}

fn check(speed: &SpeedFunction, n: usize, f_value: f64) -> Result<f64> {
    if !speed.f.is_mean() || speed.exponent <= 0.0 {
        return Err(Error::WrongSpeed("F = H^p with p in (0, 1]"));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    if !(f_value > 0.0 && f_value.is_finite()) {
        return Err(Error::InvalidConfig(format!("speed value must be positive, got {f_value}")));
    }
    Ok(f_value.powf(1.0 / speed.exponent))
}

/// Conditions for the strong-estimate `zeta` at the speed value `F`.
pub fn zeta_conditions(speed: &SpeedFunction, n: usize, f_value: f64) -> Result<ZetaConditions> {
    zeta_conditions_for(speed, n, f_value, Zeta::strong_hp(speed.exponent, n))
}

/// Conditions for an arbitrary `zeta(F)`.
pub fn zeta_conditions_for(speed: &SpeedFunction, n: usize, f_value: f64, zeta: Zeta) -> Result<ZetaConditions> {
    let h = check(speed, n, f_value)?;
    let p = speed.exponent;
    let nn = n as f64;
    let delta = p / (p + 1.0);
    let f = f_value;
    let (f1, f2, f3) = mean_derivatives(speed, h);
    let (z, z1, z2) = (zeta.value(f), zeta.d1(f), zeta.d2(f));
    let e_terms = [
        nn * 2.0 * f2 / f1,
        -nn * f2 * f2 * f / f1.powi(3),
        nn * f3 * f / (f1 * f1),
        -z2,
        f / (f1 * h * h),
        -1.0 / h,
    ];
    Ok(ZetaConditions {
        a: 2.0 * z - 2.0 * nn * delta * f2 * f * f / f1,
        b: z * z / (delta * f) - 2.0 * nn * f2 * f * z / f1 + nn * (z1 * f - z) * f1,
        c: z1 * f - nn * f2 * f * f / f1 - z,
        d: -f2,
        e: e_terms.iter().sum(),
        e_scale: e_terms.iter().map(|x| x.abs()).sum(),
        zeta_nonzero: !zeta.is_zero(),
    })
}

/// Closed forms of the same five quantities for the strong-estimate `zeta`,
/// `zeta = k H^(2p-1)` with `k = p (n - 1/(2p-1))` on the first branch.
pub fn zeta_conditions_closed(speed: &SpeedFunction, n: usize, f_value: f64) -> Result<ZetaConditions> {
    let h = check(speed, n, f_value)?;
    let p = speed.exponent;
    let nn = n as f64;
    let k = if first_branch(p, n) { p * (nn - 1.0 / (2.0 * p - 1.0)) } else { 0.0 };
    let q = 1.0 - p;
    let h_a = h.powf(2.0 * p - 1.0);
    let e = q / (p * h) * (1.0 - nn * (2.0 * p - 1.0) + k * (2.0 * p - 1.0) / p);
    Ok(ZetaConditions {
        a: 2.0 * h_a * (k + nn * p * q / (p + 1.0)),
        b: h.powf(3.0 * p - 2.0) * k * (k * (p + 1.0) / p + nn * q),
        c: h_a * q * (nn - k / p),
        d: p * q * h.powf(p - 2.0),
        e,
        e_scale: (nn * (2.0 * p - 1.0) + 1.0) * q / (p * h) + 1.0 / h,
        zeta_nonzero: k != 0.0,
    })
}
