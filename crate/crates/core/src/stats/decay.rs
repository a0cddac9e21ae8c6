//! Dispersive decay of `sup_x |U′(t)φ(x)|`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TestFunction;
use crate::propagator::Propagator;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub mass: f64,
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// Fitted slope of `ln sup|U′(t)φ|` against `ln t`.
    pub exponent: f64,
    pub intercept: f64,
    /// Fit window `[t_max/10, t_max]`.
    pub fit_start: f64,
    pub fit_points: usize,
}

impl DecayReport {
    /// `sup|U′(t)φ| / (e^{intercept} t^{exponent}) − 1` at each time in the fit window.
    pub fn fit_residuals(&self) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.sup_norms)
            .filter(|(t, _)| **t >= self.fit_start && **t > 0.0)
            .map(|(t, s)| (*t, s / (self.intercept + self.exponent * t.ln()).exp() - 1.0))
            .collect()
    }
}

pub fn decay_probe(propagator: &Propagator, phi: &TestFunction, times: &[f64]) -> Result<DecayReport> {
    let grid = propagator.grid();
    grid.ensure_same(phi.grid())?;
    let t_max = times.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let required = t_max + phi.radius();
    if required >= grid.half_period() {
        return Err(Error::WraparoundBudget { required, limit: grid.half_period() });
    }
    let sup_norms =
        times.iter().map(|&t| Ok(propagator.adjoint_evolve(phi, t)?.max_norm())).collect::<Result<Vec<f64>>>()?;
    let fit_start = t_max / 10.0;
    let (xs, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&sup_norms)
        .filter(|(t, _)| **t >= fit_start && **t > 0.0)
        .map(|(t, s)| (t.ln(), s.ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("the decay fit needs two positive times in the top decade".into()));
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let exponent = sxy / sxx;
    Ok(DecayReport {
        mass: propagator.mass(),
        times: times.to_vec(),
        sup_norms,
        exponent,
        intercept: my - exponent * mx,
        fit_start,
        fit_points: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn zero_time_is_the_test_function() {
        let g = GridSpec::new(16, 16.0).unwrap();
        let p = Propagator::new(1.0, g).unwrap();
        let phi = TestFunction::bump(g, 3.0, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let rep = decay_probe(&p, &phi, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(rep.sup_norms[0], phi.field().max_norm());
        assert_eq!(rep.fit_points, 2);
        assert!(rep.fit_residuals().iter().all(|(_, r)| r.abs() < 1e-12));
        assert!(matches!(decay_probe(&p, &phi, &[6.0]), Err(Error::WraparoundBudget { .. })));
        assert!(decay_probe(&p, &phi, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn sup_norm_decays_on_a_moderate_grid() {
        let g = GridSpec::new(64, 64.0).unwrap();
        let p = Propagator::new(1.0, g).unwrap();
        let phi = TestFunction::bump(g, 4.0, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let rep = decay_probe(&p, &phi, &[6.0, 9.0, 13.0, 18.0, 24.0]).unwrap();
        assert!(rep.sup_norms.windows(2).all(|w| w[1] < w[0]));
        assert!(rep.exponent < -1.0 && rep.exponent > -2.0, "{}", rep.exponent);
    }
}
