use super::ClassError;
use serde::{Deserialize, Serialize};

/// Modulus of continuity. All variants are nondecreasing and continuous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulus {
    /// `a * min(δ, delta0)`.
    Linear { a: f64, delta0: f64 },
    /// `a * δ²`.
    Quadratic { a: f64 },
    /// Piecewise-linear interpolation through `(0, 0)` and the given knots,
    /// constant after the last knot.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl Modulus {
    pub fn identity() -> Self {
        Modulus::Linear { a: 1.0, delta0: f64::MAX }
    }

    pub fn linear(a: f64, delta0: f64) -> Self {
        Modulus::Linear { a, delta0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Modulus::Linear { a, delta0 } => a * t.min(*delta0),
            Modulus::Quadratic { a } => a * t * t,
            Modulus::Tabulated { knots } => {
                let (mut x0, mut y0) = (0.0, 0.0);
                for &(x1, y1) in knots {
                    if t <= x1 {
                        return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
                    }
                    x0 = x1;
                    y0 = y1;
                }
                y0
            }
        }
    }

    /// Linear-modulus parameters `(a, delta0)` when symbolic linear.
    pub fn linear_params(&self) -> Option<(f64, f64)> {
        match self {
            Modulus::Linear { a, delta0 } => Some((*a, *delta0)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ClassError> {
        let ok = match self {
            Modulus::Linear { a, delta0 } => *a > 0.0 && *delta0 > 0.0,
            Modulus::Quadratic { a } => *a > 0.0 && a.is_finite(),
            Modulus::Tabulated { knots } => {
                let mut prev = (0.0, 0.0);
                !knots.is_empty()
                    && knots.iter().all(|&(x, y)| {
                        let good = x > prev.0 && y >= prev.1 && y.is_finite();
                        prev = (x, y);
                        good
                    })
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ClassError::InvalidParams(format!("invalid modulus {self:?}")))
        }
    }
}

/// One-dimensional cone (a closed interval of length `length`) and the
/// diameter cap used by the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub length: f64,
    pub rho: f64,
}

impl ConeSpec {
    pub fn validate(&self) -> Result<(), ClassError> {
        if self.length > 0.0 && self.rho > 0.0 {
            Ok(())
        } else {
            Err(ClassError::InvalidParams("cone length and rho must be positive".into()))
        }
    }
}

fn default_omega() -> Modulus {
    Modulus::identity()
}

fn default_gamma() -> Modulus {
    Modulus::Linear { a: 0.25, delta0: f64::MAX }
}

fn default_tol() -> f64 {
    1e-6
}

fn default_one() -> f64 {
    1.0
}

/// Class parameters shared by all checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "M0")]
    pub m0: u32,
    #[serde(default = "default_omega")]
    pub omega: Modulus,
    #[serde(default = "default_gamma")]
    pub gamma: Modulus,
    #[serde(rename = "R", default = "default_one")]
    pub big_r: f64,
    #[serde(rename = "R0", default = "default_one")]
    pub r0: f64,
    #[serde(default)]
    pub cone: Option<ConeSpec>,
    #[serde(default)]
    pub t_samples: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl ClassParams {
    pub fn new(r: f64, l: f64, m0: u32) -> Self {
        ClassParams {
            r,
            l,
            m0,
            omega: default_omega(),
            gamma: default_gamma(),
            big_r: 1.0,
            r0: 1.0,
            cone: None,
            t_samples: vec![],
            tol: default_tol(),
        }
    }

    pub fn with_omega(mut self, omega: Modulus) -> Self {
        self.omega = omega;
        self
    }

    /// Slope bound of the graph charts: `sqrt(L² - 1)`.
    pub fn lambda(&self) -> f64 {
        (self.l * self.l - 1.0).max(0.0).sqrt()
    }

    pub fn validate(&self) -> Result<(), ClassError> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(ClassError::InvalidParams("r must be positive".into()));
        }
        if !(self.l >= 1.0 && self.l.is_finite()) {
            return Err(ClassError::InvalidParams("L must be at least 1".into()));
        }
        if self.m0 < 1 {
            return Err(ClassError::InvalidParams("M0 must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(ClassError::InvalidParams("tol must be positive".into()));
        }
        self.omega.validate()?;
        self.gamma.validate()?;
        if let Some(c) = &self.cone {
            c.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_values() {
        assert_eq!(Modulus::linear(2.0, 0.5).eval(0.25), 0.5);
        assert_eq!(Modulus::linear(2.0, 0.5).eval(3.0), 1.0);
        assert_eq!(Modulus::Quadratic { a: 0.5 }.eval(2.0), 2.0);
        let t = Modulus::Tabulated { knots: vec![(1.0, 1.0), (2.0, 1.5)] };
        assert_eq!(t.eval(0.5), 0.5);
        assert_eq!(t.eval(1.5), 1.25);
        assert_eq!(t.eval(10.0), 1.5);
        assert!(Modulus::Tabulated { knots: vec![(1.0, 1.0), (0.5, 2.0)] }.validate().is_err());
    }

    #[test]
    fn params_json() {
        let p: ClassParams = serde_json::from_str(
            r#"{"r":0.5,"L":2,"M0":1,"omega":{"kind":"linear","a":1,"delta0":0.5}}"#,
        )
        .unwrap();
        assert_eq!(p.omega, Modulus::linear(1.0, 0.5));
        assert!(p.validate().is_ok());
        assert!(ClassParams::new(0.1, 0.5, 1).validate().is_err());
    }
}
