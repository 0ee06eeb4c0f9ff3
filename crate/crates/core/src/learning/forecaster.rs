use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::sample_index;
use crate::simplex::{LinearProgram, LpOutcome, Relation};

/// Sequential probability forecaster over a finite outcome set.
pub trait Forecaster: Send {
    fn outcomes(&self) -> usize;
    /// Forecast for step `t` (1-based).
    fn forecast(&mut self, t: u64, rng: &mut ChaCha8Rng) -> Vec<f64>;
    fn observe(&mut self, outcome: usize);
}

/// Cycles through a fixed list of forecasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledForecaster {
    pub cycle: Vec<Vec<f64>>,
}

impl ScheduledForecaster {
    pub fn new(cycle: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = cycle.first() else {
            return Err(Error::InvalidParameter("empty forecast schedule".into()));
        };
        if cycle.iter().any(|q| q.len() != first.len()) {
            return Err(Error::InvalidParameter(
                "forecasts of unequal length".into(),
            ));
        }
        Ok(ScheduledForecaster { cycle })
    }
}

impl Forecaster for ScheduledForecaster {
    fn outcomes(&self) -> usize {
        self.cycle[0].len()
    }

    fn forecast(&mut self, t: u64, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.cycle[((t - 1) % self.cycle.len() as u64) as usize].clone()
    }

    fn observe(&mut self, _outcome: usize) {}
}

#[derive(Debug, Clone)]
struct Cell {
    q: Vec<f64>,
    n: u64,
    hits: Vec<u64>,
}

/// Randomized forecaster on the grid of `Delta(S)` with denominator
/// `ceil(1/eps)`.
///
/// Each cell `q` keeps the gap `G_q = sum (e_y - q)` over the steps it was
/// forecast. The forecast is drawn from the mixture `eta` over the used
/// cells plus the grid point nearest the empirical outcome frequency that
/// minimizes `max_s sum_q eta_q (2 G_q.(e_s - q) + |e_s - q|^2)`, the
/// worst-case growth of `sum_q |G_q|^2`.
#[derive(Debug, Clone)]
pub struct GridForecaster {
    outcomes: usize,
    denominator: u32,
    cells: Vec<Cell>,
    lookup: HashMap<Vec<u32>, usize>,
    totals: Vec<u64>,
    pending: Option<usize>,
}

/// `eps`-calibrated randomized forecaster over `outcomes` outcomes.
pub fn make_calibrated_forecaster(outcomes: usize, eps: f64) -> Result<GridForecaster> {
    GridForecaster::new(outcomes, eps)
}

impl GridForecaster {
    pub fn new(outcomes: usize, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "grid pitch {eps} outside (0, 1]"
            )));
        }
        if outcomes == 0 {
            return Err(Error::InvalidParameter("empty outcome set".into()));
        }
        let denominator = (1.0 / eps - 1e-9).ceil().max(1.0) as u32;
        Ok(GridForecaster {
            outcomes,
            denominator,
            cells: Vec::new(),
            lookup: HashMap::new(),
            totals: vec![0; outcomes],
            pending: None,
        })
    }

    pub fn denominator(&self) -> u32 {
        self.denominator
    }

    /// Number of distinct grid points forecast so far.
    pub fn cells_used(&self) -> usize {
        self.cells.iter().filter(|c| c.n > 0).count()
    }

    /// Largest-remainder rounding of the empirical frequency onto the grid.
    fn nearest_point(&self) -> Vec<u32> {
        let total: u64 = self.totals.iter().sum();
        let s = self.outcomes;
        let n = self.denominator;
        let scaled: Vec<f64> = if total == 0 {
            vec![f64::from(n) / s as f64; s]
        } else {
            self.totals
                .iter()
                .map(|&c| c as f64 * f64::from(n) / total as f64)
                .collect()
        };
        let mut counts: Vec<u32> = scaled.iter().map(|v| v.floor() as u32).collect();
        let left = n - counts.iter().sum::<u32>();
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by(|&a, &b| {
            let ra = scaled[a] - scaled[a].floor();
            let rb = scaled[b] - scaled[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &k in order.iter().take(left as usize) {
            counts[k] += 1;
        }
        counts
    }

    fn cell(&mut self, counts: Vec<u32>) -> usize {
        if let Some(&k) = self.lookup.get(&counts) {
            return k;
        }
        let n = f64::from(self.denominator);
        let q = counts.iter().map(|&c| f64::from(c) / n).collect();
        self.cells.push(Cell {
            q,
            n: 0,
            hits: vec![0; self.outcomes],
        });
        self.lookup.insert(counts, self.cells.len() - 1);
        self.cells.len() - 1
    }

    /// Minimax mixture over the candidate cells.
    fn hedge(&self, candidates: &[usize]) -> Option<Vec<f64>> {
        let s = self.outcomes;
        let k = candidates.len();
        // c[y][j] = 2 G_j.(e_y - q_j) + |e_y - q_j|^2
        let mut c = vec![vec![0.0; k]; s];
        for (j, &cell) in candidates.iter().enumerate() {
            let cell = &self.cells[cell];
            let gap: Vec<f64> = (0..s)
                .map(|y| cell.hits[y] as f64 - cell.n as f64 * cell.q[y])
                .collect();
            let gq: f64 = gap.iter().zip(&cell.q).map(|(g, q)| g * q).sum();
            let qq: f64 = cell.q.iter().map(|q| q * q).sum();
            for (y, row) in c.iter_mut().enumerate() {
                row[j] = 2.0 * (gap[y] - gq) + 1.0 - 2.0 * cell.q[y] + qq;
            }
        }
        let shift = 1.0 + c.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut lp = LinearProgram::new(k);
        lp.minimize(vec![-1.0; k]);
        for row in c {
            lp.constrain(
                row.into_iter().map(|v| v + shift).collect(),
                Relation::Le,
                1.0,
            );
        }
        match lp.solve() {
            LpOutcome::Optimal { x, .. } => {
                let total: f64 = x.iter().sum();
                (total > 0.0).then(|| x.into_iter().map(|v| v / total).collect())
            }
            _ => None,
        }
    }
}

impl Forecaster for GridForecaster {
    fn outcomes(&self) -> usize {
        self.outcomes
    }

    fn forecast(&mut self, _t: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let fresh = self.nearest_point();
        let fresh = self.cell(fresh);
        let mut candidates: Vec<usize> = (0..self.cells.len())
            .filter(|&k| self.cells[k].n > 0)
            .collect();
        if !candidates.contains(&fresh) {
            candidates.push(fresh);
        }
        let chosen = if candidates.len() == 1 {
            candidates[0]
        } else {
            match self.hedge(&candidates) {
                Some(eta) => candidates[sample_index(&eta, rng)],
                None => fresh,
            }
        };
        self.pending = Some(chosen);
        self.cells[chosen].q.clone()
    }

    fn observe(&mut self, outcome: usize) {
        if let Some(k) = self.pending.take() {
            self.cells[k].n += 1;
            self.cells[k].hits[outcome] += 1;
        }
        self.totals[outcome] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::{calibration_score, ForecastRecord};
    use crate::rng::stream;

    fn run(f: &mut GridForecaster, steps: u64, nature: impl Fn(u64, &[f64]) -> usize) -> Vec<f64> {
        let mut rec = ForecastRecord::new(f.outcomes());
        let mut last = vec![1.0 / f.outcomes() as f64; f.outcomes()];
        for t in 1..=steps {
            let mut rng = stream(11, 0, t);
            let q = f.forecast(t, &mut rng);
            let y = nature(t, &last);
            f.observe(y);
            rec.push(&q, y);
            last = q;
        }
        calibration_score(&rec, steps as usize).unwrap()
    }

    #[test]
    fn grid_denominator() {
        assert_eq!(GridForecaster::new(3, 0.1).unwrap().denominator(), 10);
        assert_eq!(GridForecaster::new(3, 0.3).unwrap().denominator(), 4);
        assert!(GridForecaster::new(3, 0.0).is_err());
        assert!(GridForecaster::new(3, 1.5).is_err());
    }

    #[test]
    fn constant_nature_is_learned() {
        let mut f = GridForecaster::new(3, 0.1).unwrap();
        let score = run(&mut f, 2000, |_, _| 2);
        assert!(score.iter().all(|&v| v <= 0.1 + 0.01), "{score:?}");
    }

    #[test]
    fn alternating_nature() {
        let mut f = GridForecaster::new(2, 0.1).unwrap();
        let score = run(&mut f, 4000, |t, _| (t % 2) as usize);
        assert!(score.iter().all(|&v| v <= 0.25), "{score:?}");
    }

    #[test]
    fn scheduled_forecaster_cycles() {
        let mut f = ScheduledForecaster::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut rng = stream(0, 0, 0);
        assert_eq!(f.forecast(1, &mut rng), vec![1.0, 0.0]);
        assert_eq!(f.forecast(2, &mut rng), vec![0.0, 1.0]);
        assert_eq!(f.forecast(5, &mut rng), vec![1.0, 0.0]);
    }
}
