//! Polytropic gas `p = rho^gamma`, the Bernoulli relation and the two density
//! inversions used by the compressible solver.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;

/// Polytropic gas with isentropic coefficient `gamma > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasModel<T> {
    gamma: T,
}

impl<T: Real> GasModel<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma > T::one() && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "isentropic coefficient must exceed 1, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    /// Air, `gamma = 7/5`.
    pub fn air() -> Self {
        Self { gamma: T::of(1.4) }
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    fn check_density(rho: T) -> Result<()> {
        if rho >= T::zero() && rho.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("density {rho} must be finite and non-negative")))
        }
    }

    pub fn pressure(&self, rho: T) -> Result<T> {
        Self::check_density(rho)?;
        Ok(rho.powf(self.gamma))
    }

    /// Specific enthalpy `gamma/(gamma-1) rho^(gamma-1)`, normalized so that it
    /// vanishes in vacuum.
    pub fn enthalpy(&self, rho: T) -> Result<T> {
        Self::check_density(rho)?;
        Ok(self.enthalpy_unchecked(rho))
    }

    #[inline]
    fn enthalpy_unchecked(&self, rho: T) -> T {
        self.gamma / (self.gamma - T::one()) * rho.powf(self.gamma - T::one())
    }

    /// Inverse of [`enthalpy`](Self::enthalpy) on non-negative arguments.
    pub fn density_from_enthalpy(&self, enthalpy: T) -> Result<T> {
        if !(enthalpy >= T::zero()) {
            return Err(Error::Domain(format!(
                "enthalpy {enthalpy} is negative; no real density"
            )));
        }
        let g1 = self.gamma - T::one();
        Ok((enthalpy * g1 / self.gamma).powf(T::one() / g1))
    }

    pub fn sound_speed(&self, rho: T) -> Result<T> {
        Self::check_density(rho)?;
        Ok(self.sound_speed_unchecked(rho))
    }

    #[inline]
    fn sound_speed_unchecked(&self, rho: T) -> T {
        (self.gamma * rho.powf(self.gamma - T::one())).sqrt()
    }

    pub fn mach(&self, speed: T, rho: T) -> Result<T> {
        if !(rho > T::zero() && rho.is_finite()) {
            return Err(Error::Domain(format!("Mach number needs positive density, got {rho}")));
        }
        Ok(speed.abs() / self.sound_speed_unchecked(rho))
    }
}

/// Global Bernoulli constant of an irrotational flow and the quantities
/// derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernoulliState<T> {
    pub bernoulli: T,
    /// `sqrt(2 B)`: the density vanishes at this speed.
    pub limit_speed: T,
    pub stagnation_density: T,
    /// Density where `|v| = c` on the Bernoulli relation.
    pub sonic_density: T,
    /// `rho^2 |v|^2 / 2` at the sonic point: right end of the subsonic branch
    /// of the flux inversion.
    pub flux_max: T,
}

/// Result of inverting the Bernoulli relation for given `|grad psi|^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxInversion<T> {
    pub density: T,
    /// `1 / density`, the coefficient of the stream-function equation.
    pub inverse_density: T,
}

const FLUX_MAX_ITERS: usize = 200;

impl<T: Real> BernoulliState<T> {
    pub fn new(gas: &GasModel<T>, bernoulli: T) -> Result<Self> {
        if !(bernoulli > T::zero() && bernoulli.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Bernoulli constant must be positive, got {bernoulli}"
            )));
        }
        let g = gas.gamma();
        let g1 = g - T::one();
        let two = T::of(2.0);
        let stagnation_density = gas.density_from_enthalpy(bernoulli)?;
        // B = c^2/2 + pi(rho) with c^2 = g rho^(g-1) gives
        // rho_s^(g-1) = 2 (g-1) B / (g (g+1)).
        let sonic_density = (two * g1 * bernoulli / (g * (g + T::one()))).powf(T::one() / g1);
        let flux_max = g * sonic_density.powf(g + T::one()) / two;
        Ok(Self {
            bernoulli,
            limit_speed: (two * bernoulli).sqrt(),
            stagnation_density,
            sonic_density,
            flux_max,
        })
    }

    /// State with free-stream density 1 and free-stream Mach number `mach_inf`.
    pub fn from_free_stream(gas: &GasModel<T>, mach_inf: T) -> Result<Self> {
        if !(mach_inf >= T::zero() && mach_inf.is_finite()) {
            return Err(Error::InvalidParameter(format!("free-stream Mach {mach_inf}")));
        }
        let q = mach_inf * gas.sound_speed_unchecked(T::one());
        Self::new(gas, q * q / T::of(2.0) + gas.enthalpy_unchecked(T::one()))
    }

    /// Free-stream speed for density 1 under this state.
    pub fn speed_at_unit_density(&self, gas: &GasModel<T>) -> Result<T> {
        let excess = self.bernoulli - gas.enthalpy_unchecked(T::one());
        if excess < T::zero() {
            return Err(Error::Domain("unit density exceeds stagnation density".into()));
        }
        Ok((T::of(2.0) * excess).sqrt())
    }

    /// Density on the Bernoulli relation at speed `q`.
    pub fn density_from_speed(&self, gas: &GasModel<T>, q: T) -> Result<T> {
        if !(q.abs() < self.limit_speed) {
            return Err(Error::LimitSpeedExceeded {
                speed: q.to64(),
                limit: self.limit_speed.to64(),
            });
        }
        gas.density_from_enthalpy((self.bernoulli - q * q / T::of(2.0)).max(T::zero()))
    }

    /// Subsonic-branch density for `m = |grad psi|^2 / 2` (with
    /// `rho v = -grad^perp psi`, so `m = rho^2 |v|^2 / 2`).
    ///
    /// Solves `m / rho^2 + pi(rho) = B` on `[rho_sonic, rho_stagnation]` by
    /// Newton's method safeguarded with bisection.
    pub fn density_from_flux(&self, gas: &GasModel<T>, m: T) -> Result<FluxInversion<T>> {
        if !(m >= T::zero()) || !m.is_finite() {
            return Err(Error::Domain(format!("flux argument {m} must be non-negative")));
        }
        if m >= self.flux_max {
            return Err(Error::SonicFluxExceeded {
                flux: m.to64(),
                flux_max: self.flux_max.to64(),
            });
        }
        if m == T::zero() {
            return Ok(FluxInversion {
                density: self.stagnation_density,
                inverse_density: T::one() / self.stagnation_density,
            });
        }
        let g = gas.gamma();
        let residual = |rho: T| m / (rho * rho) + gas.enthalpy_unchecked(rho) - self.bernoulli;
        let slope = |rho: T| -T::of(2.0) * m / (rho * rho * rho) + g * rho.powf(g - T::of(2.0));

        let mut lo = self.sonic_density;
        let mut hi = self.stagnation_density;
        let mut rho = hi;
        let tol = T::of(4.0) * T::epsilon();
        for _ in 0..FLUX_MAX_ITERS {
            let f = residual(rho);
            if f == T::zero() {
                break;
            }
            if f > T::zero() {
                hi = rho;
            } else {
                lo = rho;
            }
            let d = slope(rho);
            let newton = rho - f / d;
            let next = if d > T::zero() && newton > lo && newton < hi {
                newton
            } else {
                (lo + hi) / T::of(2.0)
            };
            let step = (next - rho).abs();
            rho = next;
            if step <= tol * rho || (hi - lo) <= tol * hi {
                break;
            }
        }
        Ok(FluxInversion {
            density: rho,
            inverse_density: T::one() / rho,
        })
    }
}
