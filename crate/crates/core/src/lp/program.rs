use serde::Serialize;

use crate::error::{invalid_arg, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// Sparse row `sum coeffs[k].1 * v[coeffs[k].0]  (relation)  rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program over named variables, each with lower bound 0 and an
/// optional finite upper bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearProgram {
    sense: Sense,
    names: Vec<String>,
    objective: Vec<f64>,
    upper: Vec<Option<f64>>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            names: Vec::new(),
            objective: Vec::new(),
            upper: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Registers a variable and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, objective: f64) -> Result<usize> {
        if !objective.is_finite() {
            return Err(invalid_arg("objective coefficients must be finite"));
        }
        self.names.push(name.into());
        self.objective.push(objective);
        self.upper.push(None);
        Ok(self.names.len() - 1)
    }

    pub fn set_upper(&mut self, var: usize, bound: f64) -> Result<()> {
        if var >= self.names.len() {
            return Err(invalid_arg(format!("unknown variable index {var}")));
        }
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(invalid_arg(format!(
                "upper bound {bound} must be finite and non-negative"
            )));
        }
        self.upper[var] = Some(bound);
        Ok(())
    }

    pub fn add_constraint(
        &mut self,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> Result<()> {
        if !rhs.is_finite() {
            return Err(invalid_arg("constraint right-hand sides must be finite"));
        }
        for &(v, c) in &coeffs {
            if v >= self.names.len() {
                return Err(invalid_arg(format!(
                    "constraint references unknown variable {v}"
                )));
            }
            if !c.is_finite() {
                return Err(invalid_arg("constraint coefficients must be finite"));
            }
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(())
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.names
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn upper_bounds(&self) -> &[Option<f64>] {
        &self.upper
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Largest violation over all constraints and bounds, with the index of
    /// the offending constraint (`None` for a bound or a clean point).
    pub fn max_violation(&self, values: &[f64]) -> (f64, Option<usize>) {
        let mut worst = (0.0, None);
        for (k, c) in self.constraints.iter().enumerate() {
            let lhs: f64 = c.coeffs.iter().map(|&(v, a)| a * values[v]).sum();
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            if viol > worst.0 {
                worst = (viol, Some(k));
            }
        }
        for (v, &x) in values.iter().enumerate() {
            let over = self.upper[v].map_or(0.0, |u| x - u);
            let viol = (-x).max(over);
            if viol > worst.0 {
                worst = (viol, None);
            }
        }
        worst
    }
}
