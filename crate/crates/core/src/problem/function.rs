use std::fmt;

use crate::error::{Error, Result};

/// Catalog of one-dimensional data functions.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFunction1D {
    Constant(f64),
    /// `c0 + c1 q + c2 q² + …`
    Polynomial(Vec<f64>),
    /// `amplitude · sin(frequency · q + phase)`
    Sine { amplitude: f64, frequency: f64, phase: f64 },
    /// `scale · exp(-((q - center) / width)²)`
    Gaussian { scale: f64, center: f64, width: f64 },
    /// `scale · q (1 - q)`
    Bubble { scale: f64 },
}

impl ScalarFunction1D {
    pub fn eval(&self, q: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ci| acc * q + ci),
            Self::Sine { amplitude, frequency, phase } => amplitude * (frequency * q + phase).sin(),
            Self::Gaussian { scale, center, width } => {
                let z = (q - center) / width;
                scale * (-z * z).exp()
            }
            Self::Bubble { scale } => scale * q * (1.0 - q),
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            Self::Constant(c) => *c == 0.0,
            Self::Polynomial(c) => c.iter().all(|v| *v == 0.0),
            Self::Sine { amplitude, .. } => *amplitude == 0.0,
            Self::Gaussian { scale, .. } => *scale == 0.0,
            Self::Bubble { scale } => *scale == 0.0,
        }
    }

    pub fn check(&self) -> Result<()> {
        let params: Vec<f64> = self.params();
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite parameter in {self}")));
        }
        if let Self::Gaussian { width, .. } = self {
            if *width <= 0.0 {
                return Err(Error::InvalidArgument("gaussian width must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Constant(_) => "constant",
            Self::Polynomial(_) => "poly",
            Self::Sine { .. } => "sine",
            Self::Gaussian { .. } => "gaussian",
            Self::Bubble { .. } => "bubble",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Self::Constant(c) => vec![*c],
            Self::Polynomial(c) => c.clone(),
            Self::Sine { amplitude, frequency, phase } => vec![*amplitude, *frequency, *phase],
            Self::Gaussian { scale, center, width } => vec![*scale, *center, *width],
            Self::Bubble { scale } => vec![*scale],
        }
    }

    /// Builds a function from its catalog kind and parameter list.
    pub fn from_kind(kind: &str, params: &[f64]) -> Result<Self> {
        let want = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{kind} expects {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let f = match kind {
            "constant" => {
                want(1)?;
                Self::Constant(params[0])
            }
            "poly" | "polynomial" => {
                if params.is_empty() {
                    return Err(Error::InvalidArgument("poly expects at least one coefficient".into()));
                }
                Self::Polynomial(params.to_vec())
            }
            "sine" => {
                want(3)?;
                Self::Sine { amplitude: params[0], frequency: params[1], phase: params[2] }
            }
            "gaussian" => {
                want(3)?;
                Self::Gaussian { scale: params[0], center: params[1], width: params[2] }
            }
            "bubble" => match params.len() {
                0 => Self::Bubble { scale: 1.0 },
                1 => Self::Bubble { scale: params[0] },
                n => return Err(Error::InvalidArgument(format!("bubble expects 0 or 1 parameter, got {n}"))),
            },
            other => return Err(Error::InvalidArgument(format!("unknown function kind '{other}'"))),
        };
        f.check()?;
        Ok(f)
    }

    /// Parses `kind` or `kind:p1,p2,…`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = match spec.split_once(':') {
            Some((k, r)) => (k.trim(), r),
            None => (spec.trim(), ""),
        };
        let params = parse_number_list(rest)?;
        Self::from_kind(kind, &params)
    }
}

impl fmt::Display for ScalarFunction1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params().iter().map(|v| format!("{v:?}")).collect();
        write!(f, "{}:{}", self.kind(), params.join(","))
    }
}

/// Comma-separated numbers; each entry may be a product of factors
/// written as float literals, `pi` or `sqrt(<float>)`, e.g. `2*pi`.
pub fn parse_number_list(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_number).collect()
}

pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) if rest.contains("pi") || rest.contains("sqrt") => (true, rest),
        _ => (false, s),
    };
    let mut value = 1.0;
    for factor in body.split('*') {
        let factor = factor.trim();
        let v = if factor == "pi" {
            std::f64::consts::PI
        } else if let Some(inner) = factor.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            inner
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad number '{s}'")))?
                .sqrt()
        } else {
            factor.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad number '{s}'")))?
        };
        value *= v;
    }
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite number '{s}'")));
    }
    Ok(if neg { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn evaluation() {
        assert_eq!(ScalarFunction1D::Constant(3.0).eval(7.0), 3.0);
        assert_eq!(ScalarFunction1D::Polynomial(vec![1.0, 2.0, 3.0]).eval(2.0), 17.0);
        assert_abs_diff_eq!(ScalarFunction1D::Bubble { scale: 1.0 }.eval(0.5), 0.25);
        let g = ScalarFunction1D::Gaussian { scale: 50.0, center: 2.85, width: 0.075 };
        assert_eq!(g.eval(2.85), 50.0);
        let s = ScalarFunction1D::Sine { amplitude: 2f64.sqrt(), frequency: std::f64::consts::PI, phase: 0.0 };
        assert_abs_diff_eq!(s.eval(0.5), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn parse_and_display() {
        let f = ScalarFunction1D::parse("sine: sqrt(2), pi, 0").unwrap();
        assert_eq!(
            f,
            ScalarFunction1D::Sine { amplitude: 2f64.sqrt(), frequency: std::f64::consts::PI, phase: 0.0 }
        );
        assert_eq!(ScalarFunction1D::parse(&f.to_string()).unwrap(), f);
        assert_eq!(ScalarFunction1D::parse("bubble").unwrap(), ScalarFunction1D::Bubble { scale: 1.0 });
        assert_eq!(parse_number("-2*pi").unwrap(), -2.0 * std::f64::consts::PI);
        assert_eq!(parse_number("-0.5").unwrap(), -0.5);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ScalarFunction1D::parse("gaussian:1,0,0").is_err());
        assert!(ScalarFunction1D::parse("gaussian:1,0").is_err());
        assert!(ScalarFunction1D::parse("wave:1").is_err());
        assert!(ScalarFunction1D::parse("constant:abc").is_err());
    }
}
