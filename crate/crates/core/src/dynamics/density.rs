use nalgebra::Matrix3;
use num_complex::Complex64;
use std::fmt;

pub type CMatrix3 = Matrix3<Complex64>;

/// Number of reals in the packed integrator state: 9 complex entries of ρ
/// followed by the lost population.
pub const STATE_LEN: usize = 19;

/// 3×3 density matrix over |1⟩, |2⟩, |3⟩ with the population that has
/// left the Λ system tracked separately.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub rho: CMatrix3,
    /// Rest-frame time (s).
    pub t: f64,
    pub p_loss: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantTolerances {
    pub hermiticity: f64,
    pub conservation: f64,
    pub positivity: f64,
}

impl Default for InvariantTolerances {
    fn default() -> Self {
        Self { hermiticity: 1e-8, conservation: 1e-6, positivity: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InvariantViolation {
    NotHermitian(f64),
    Conservation(f64),
    NegativeEigenvalue(f64),
    PopulationOutOfRange { level: usize, value: f64 },
    NonFinite,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotHermitian(e) => write!(f, "max |ρ - ρ†| = {e:e}"),
            Self::Conservation(e) => write!(f, "|tr ρ + p_loss - 1| = {e:e}"),
            Self::NegativeEigenvalue(e) => write!(f, "smallest eigenvalue {e:e}"),
            Self::PopulationOutOfRange { level, value } => {
                write!(f, "population of |{}⟩ = {value:e}", level + 1)
            }
            Self::NonFinite => f.write_str("non-finite entry"),
        }
    }
}

impl DensityMatrix {
    /// All population in |1⟩.
    pub fn ground(t: f64) -> Self {
        let mut rho = CMatrix3::zeros();
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { rho, t, p_loss: 0.0 }
    }

    /// Population of level `i` (0-based).
    pub fn population(&self, i: usize) -> f64 {
        self.rho[(i, i)].re
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.rho[(i, i)].re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn conservation_error(&self) -> f64 {
        (self.trace() + self.p_loss - 1.0).abs()
    }

    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().min()
    }

    pub fn check(&self, tol: &InvariantTolerances) -> Result<(), InvariantViolation> {
        if !self.rho.iter().all(|z| z.re.is_finite() && z.im.is_finite()) || !self.p_loss.is_finite() {
            return Err(InvariantViolation::NonFinite);
        }
        let herm = self.hermiticity_error();
        if herm > tol.hermiticity {
            return Err(InvariantViolation::NotHermitian(herm));
        }
        let cons = self.conservation_error();
        if cons > tol.conservation {
            return Err(InvariantViolation::Conservation(cons));
        }
        for level in 0..3 {
            let value = self.population(level);
            if value < -tol.positivity || value > 1.0 + tol.positivity {
                return Err(InvariantViolation::PopulationOutOfRange { level, value });
            }
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -tol.positivity {
            return Err(InvariantViolation::NegativeEigenvalue(min_eig));
        }
        Ok(())
    }

    pub fn pack(&self) -> [f64; STATE_LEN] {
        let mut y = [0.0; STATE_LEN];
        for i in 0..3 {
            for j in 0..3 {
                let z = self.rho[(i, j)];
                y[2 * (3 * i + j)] = z.re;
                y[2 * (3 * i + j) + 1] = z.im;
            }
        }
        y[18] = self.p_loss;
        y
    }

    pub fn unpack(t: f64, y: &[f64; STATE_LEN]) -> Self {
        let rho = CMatrix3::from_fn(|i, j| Complex64::new(y[2 * (3 * i + j)], y[2 * (3 * i + j) + 1]));
        Self { rho, t, p_loss: y[18] }
    }
}
