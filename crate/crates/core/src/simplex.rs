//! Dense two-phase simplex with Bland's rule. Small problems only; the
//! pivoting rule is deterministic so identical inputs give identical bases.

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Eq,
    Ge,
}

/// `min c^T x` subject to rows and `x >= 0`.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    vars: usize,
    rows: Vec<(Vec<f64>, Relation, f64)>,
    objective: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        value: f64,
    },
    Infeasible,
    Unbounded,
    /// Pivot budget exhausted; only reachable through numerical trouble.
    Stalled,
}

impl LinearProgram {
    pub(crate) fn new(vars: usize) -> Self {
        LinearProgram {
            vars,
            rows: Vec::new(),
            objective: vec![0.0; vars],
        }
    }

    pub(crate) fn minimize(&mut self, c: Vec<f64>) {
        assert_eq!(c.len(), self.vars);
        self.objective = c;
    }

    pub(crate) fn constrain(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.vars);
        self.rows.push((coeffs, rel, rhs));
    }

    pub(crate) fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective, self.vars)
    }
}

struct Tableau {
    /// `m` rows of `cols + 1` entries; the last entry is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    /// Columns at or above this index are artificial.
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.vars;
        let rows: Vec<(Vec<f64>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|(c, rel, b)| {
                if *b < 0.0 {
                    let flipped = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.iter().map(|v| -v).collect(), flipped, -b)
                } else {
                    (c.clone(), *rel, *b)
                }
            })
            .collect();
        let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let artificials = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let cols = n + slacks + artificials;
        let mut a = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut s, mut art) = (n, n + slacks);
        for (coeffs, rel, b) in rows {
            let mut row = vec![0.0; cols + 1];
            row[..n].copy_from_slice(&coeffs);
            row[cols] = b;
            match rel {
                Relation::Le => {
                    row[s] = 1.0;
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -1.0;
                    s += 1;
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            a.push(row);
        }
        Tableau {
            a,
            basis,
            cols,
            first_artificial: n + slacks,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c];
        self.a[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost` over columns `< limit`; `None` when unbounded,
    /// `Some(false)` when the pivot budget runs out.
    fn optimize(&mut self, cost: &[f64], limit: usize) -> Option<bool> {
        let rhs = self.cols;
        for _ in 0..MAX_PIVOTS {
            let mut entering = None;
            for j in 0..limit {
                if self.basis.contains(&j) {
                    continue;
                }
                let d = cost[j]
                    - self
                        .a
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| cost[b] * row[j])
                        .sum::<f64>();
                if d < -COST_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Some(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.a.iter().enumerate() {
                if row[j] > PIVOT_EPS {
                    let ratio = row[rhs] / row[j];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let (i, _) = leave?;
            self.pivot(i, j);
        }
        Some(false)
    }

    fn run(mut self, objective: &[f64], vars: usize) -> LpOutcome {
        let rhs = self.cols;
        if self.first_artificial < self.cols {
            let mut phase_one = vec![0.0; self.cols];
            phase_one[self.first_artificial..]
                .iter_mut()
                .for_each(|v| *v = 1.0);
            match self.optimize(&phase_one, self.cols) {
                Some(true) => {}
                Some(false) => return LpOutcome::Stalled,
                None => unreachable!("phase one is bounded below by zero"),
            }
            let infeasibility: f64 = self
                .a
                .iter()
                .zip(&self.basis)
                .filter(|(_, &b)| b >= self.first_artificial)
                .map(|(row, _)| row[rhs])
                .sum();
            let scale = 1.0 + self.a.iter().map(|r| r[rhs].abs()).fold(0.0, f64::max);
            if infeasibility > 1e-9 * scale {
                return LpOutcome::Infeasible;
            }
            // Drive zero-level artificials out of the basis or drop their rows.
            let mut i = 0;
            while i < self.a.len() {
                if self.basis[i] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| self.a[i][j].abs() > PIVOT_EPS) {
                        Some(j) => {
                            self.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            self.a.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        let mut cost = vec![0.0; self.cols];
        cost[..vars].copy_from_slice(objective);
        match self.optimize(&cost, self.first_artificial) {
            Some(true) => {}
            Some(false) => return LpOutcome::Stalled,
            None => return LpOutcome::Unbounded,
        }
        let mut x = vec![0.0; vars];
        for (row, &b) in self.a.iter().zip(&self.basis) {
            if b < vars {
                x[b] = row[rhs].max(0.0);
            }
        }
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(o: LpOutcome) -> (Vec<f64>, f64) {
        match o {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![-3.0, -5.0]);
        lp.constrain(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.constrain(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.constrain(vec![3.0, 2.0], Relation::Le, 18.0);
        let (x, v) = optimal(lp.solve());
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
        assert!((v + 36.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y s.t. x + y = 1, x >= 0.3, y - x >= -0.1
        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![2.0, 1.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.constrain(vec![1.0, 0.0], Relation::Ge, 0.3);
        lp.constrain(vec![-1.0, 1.0], Relation::Ge, -0.1);
        let (x, _) = optimal(lp.solve());
        assert!((x[0] - 0.3).abs() < 1e-9 && (x[1] - 0.7).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.constrain(vec![1.0], Relation::Ge, 2.0);
        lp.constrain(vec![1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![-1.0, 0.0]);
        lp.constrain(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.minimize(vec![1.0, 0.0]);
        lp.constrain(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.constrain(vec![2.0, 2.0], Relation::Eq, 2.0);
        let (x, v) = optimal(lp.solve());
        assert!(v.abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }
}
