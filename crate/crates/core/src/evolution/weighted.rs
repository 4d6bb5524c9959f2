use super::{Evolution, EvolutionError, ScaledMatrix, Structure};
use crate::rates::{GrowthRate, TimeDomain};
use crate::scalar::Real;

/// The system with propagator `(μ(k)/μ(n))^{-γ} Φ(k, n)`.
#[derive(Clone, Debug)]
pub struct WeightedSystem<F, S> {
    pub base: S,
    pub rate: GrowthRate<F>,
    pub gamma: F,
}

impl<F: Real, S: Evolution<F>> WeightedSystem<F, S> {
    pub fn new(base: S, rate: GrowthRate<F>, gamma: F) -> Self {
        WeightedSystem { base, rate, gamma }
    }

    fn weight(&self, to: F, from: F) -> Result<F, EvolutionError> {
        if self.gamma == F::zero() {
            return Ok(F::zero());
        }
        Ok(self.gamma * self.rate.log_quotient(to, from)?.value)
    }
}

pub fn weighted_propagate<F: Real, S: Evolution<F>>(
    w: &WeightedSystem<F, S>,
    to: F,
    from: F,
) -> Result<ScaledMatrix<F>, EvolutionError> {
    w.propagate(to, from)
}

impl<F: Real, S: Evolution<F>> Evolution<F> for WeightedSystem<F, S> {
    fn time_domain(&self) -> TimeDomain {
        self.base.time_domain()
    }

    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn structure(&self) -> Structure {
        self.base.structure()
    }

    fn propagate(&self, to: F, from: F) -> Result<ScaledMatrix<F>, EvolutionError> {
        let w = self.weight(to, from)?;
        Ok(self.base.propagate(to, from)?.shift_log(-w))
    }

    fn sampled_potentials(&self, horizon: usize) -> Result<Vec<Vec<F>>, EvolutionError> {
        let mut pots = self.base.sampled_potentials(horizon)?;
        if self.gamma == F::zero() {
            return Ok(pots);
        }
        let n = horizon as i64;
        let logs = (-n..=n).map(|t| self.rate.log_rate(F::of_i64(t))).collect::<Result<Vec<F>, _>>()?;
        for row in &mut pots {
            for (p, r) in row.iter_mut().zip(&logs) {
                *p -= self.gamma * *r;
            }
        }
        Ok(pots)
    }

    fn sampled_steps(&self, horizon: usize) -> Result<Vec<ScaledMatrix<F>>, EvolutionError> {
        let n = horizon as i64;
        self.base
            .sampled_steps(horizon)?
            .into_iter()
            .zip(-n..n)
            .map(|(m, j)| Ok(m.shift_log(-self.weight(F::of_i64(j + 1), F::of_i64(j))?)))
            .collect()
    }
}
