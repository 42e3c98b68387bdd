//! Parsing of list-valued and state-valued flags.

use num_complex::Complex64 as C64;

use crate::statevec::Qubit;

use super::CliError;

/// Relative change beyond which renormalizing `--state` triggers a warning.
pub const RENORM_WARN: f64 = 1e-9;

fn numbers(s: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Usage(format!("{flag}: `{t}` is not a finite number")))
        })
        .collect()
}

/// A named state (`0`, `1`, `plus`, `minus`, `+`, `-`) or amplitudes as
/// `alpha,beta` (real) or `re_alpha,im_alpha,re_beta,im_beta`. Returns the
/// normalized qubit and the norm it was given with.
pub fn parse_state(s: &str) -> Result<(Qubit, f64), CliError> {
    let named = match s.trim() {
        "0" | "zero" => Some(Qubit::zero()),
        "1" | "one" => Some(Qubit::one()),
        "plus" | "+" => Some(Qubit::plus()),
        "minus" | "-" => Some(Qubit::minus()),
        _ => None,
    };
    if let Some(q) = named {
        return Ok((q, 1.0));
    }
    let v = numbers(s, "--state")?;
    let (alpha, beta) = match v[..] {
        [a, b] => (C64::new(a, 0.0), C64::new(b, 0.0)),
        [ar, ai, br, bi] => (C64::new(ar, ai), C64::new(br, bi)),
        _ => {
            return Err(CliError::Usage(format!(
                "--state: expected a named state or 2 or 4 numbers, got {}",
                v.len()
            )))
        }
    };
    let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
    let q = Qubit::normalized(alpha, beta).map_err(|e| CliError::Usage(format!("--state: {e}")))?;
    Ok((q, norm))
}

/// Four Pauli coefficients given as 4 reals or 4 `re,im` pairs.
pub fn parse_coefficients(s: &str) -> Result<[C64; 4], CliError> {
    let v = numbers(s, "--k")?;
    match v.len() {
        4 => Ok([0, 1, 2, 3].map(|i| C64::new(v[i], 0.0))),
        8 => Ok([0, 1, 2, 3].map(|i| C64::new(v[2 * i], v[2 * i + 1]))),
        n => Err(CliError::Usage(format!("--k: expected 4 or 8 numbers, got {n}"))),
    }
}

/// Comma-separated `b^2` values; at least one.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    if s.trim().is_empty() {
        return Err(CliError::Usage("--grid: empty grid".into()));
    }
    numbers(s, "--grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_and_numeric_states() {
        assert_eq!(parse_state("plus").unwrap().0, Qubit::plus());
        assert_eq!(parse_state("1").unwrap().0, Qubit::one());
        let (q, norm) = parse_state("0.6,0.8").unwrap();
        assert_eq!(norm, 1.0);
        assert!((q.alpha.re - 0.6).abs() < 1e-15);
        let (q, norm) = parse_state("3,0,0,4").unwrap();
        assert_eq!(norm, 5.0);
        assert!((q.beta.im - 0.8).abs() < 1e-15);
        assert!(parse_state("0,0").is_err());
        assert!(parse_state("1,2,3").is_err());
        assert!(parse_state("nan,1").is_err());
    }

    #[test]
    fn coefficient_lists() {
        assert_eq!(parse_coefficients("1,0,0,0").unwrap()[0], C64::new(1.0, 0.0));
        assert_eq!(parse_coefficients("0,0,0,1,0,0,0,0").unwrap()[1], C64::new(0.0, 1.0));
        assert!(parse_coefficients("1,0").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("0.1,,0.2").is_err());
    }
}
