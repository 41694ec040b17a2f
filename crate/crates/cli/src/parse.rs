//! Shell-safe parsers for complex numbers, Möbius maps and function expressions.

use hardylab::analytic::Analytic;
use hardylab::moebius::{Domain, MoebiusMap};
use hardylab::{CoefficientFunction, Complex64};

/// Parses "x", "yi", "x+yi" or "x-yi" (no spaces); "i" alone is 1i.
pub fn complex(text: &str) -> Result<Complex64, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let bad = || format!("cannot parse complex number '{text}' (expected x+yi)");
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| -> Result<f64, String> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn complex_list(text: &str) -> Result<Vec<Complex64>, String> {
    text.split(',').map(complex).collect()
}

/// "α,β,γ,δ" for z ↦ (αz+β)/(γz+δ).
pub fn map(text: &str, domain: Domain) -> Result<MoebiusMap, String> {
    let v = complex_list(text)?;
    if v.len() != 4 {
        return Err(format!("a map needs four comma-separated coefficients, got {}", v.len()));
    }
    MoebiusMap::new(v[0], v[1], v[2], v[3], domain).map_err(|e| e.to_string())
}

/// Function expressions, joined by '*' for products:
/// `example-h`, `eigen-sum:S`, `power:S`, `exp`, `exp:R`, `singular-inner:B`,
/// `poly:c0,c1,…`, `const:C`.
pub fn function(expr: &str, a: Option<f64>) -> Result<Analytic, String> {
    let factors: Vec<Analytic> = expr.split('*').map(|f| factor(f, a)).collect::<Result<_, _>>()?;
    Ok(if factors.len() == 1 { factors.into_iter().next().unwrap() } else { Analytic::Product(factors) })
}

fn factor(expr: &str, a: Option<f64>) -> Result<Analytic, String> {
    let (name, arg) = match expr.split_once(':') {
        Some((n, r)) => (n, Some(r)),
        None => (expr, None),
    };
    let need_arg = || arg.ok_or_else(|| format!("function '{name}' needs an argument ({name}:...)"));
    let need_a = || a.ok_or_else(|| format!("function '{name}' needs --a0 (or --a)"));
    match name {
        "example-h" => Ok(Analytic::eigen_pair_sum(Complex64::new(0.0, 0.0), need_a()?)),
        "eigen-sum" => Ok(Analytic::eigen_pair_sum(complex(need_arg()?)?, need_a()?)),
        "power" => Ok(Analytic::power(complex(need_arg()?)?)),
        "exp" => Ok(Analytic::exp(arg.map(complex).transpose()?.unwrap_or(Complex64::new(1.0, 0.0)))),
        "singular-inner" => {
            let b: f64 = need_arg()?.parse().map_err(|_| format!("bad singular-inner parameter in '{expr}'"))?;
            if b < 0.0 {
                return Err(format!("singular-inner needs b >= 0, got {b}"));
            }
            Ok(Analytic::singular_inner(b))
        }
        "poly" => Ok(Analytic::Poly(CoefficientFunction::new(complex_list(need_arg()?)?))),
        "const" => Ok(Analytic::constant(complex(need_arg()?)?)),
        _ => Err(format!("unknown function '{name}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_numbers() {
        assert_eq!(complex("0.25+3i").unwrap(), c(0.25, 3.0));
        assert_eq!(complex("-0.2+1i").unwrap(), c(-0.2, 1.0));
        assert_eq!(complex("-0.2-i").unwrap(), c(-0.2, -1.0));
        assert_eq!(complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(complex("-3.5i").unwrap(), c(0.0, -3.5));
        assert_eq!(complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(complex("1e-3-2.5e2i").unwrap(), c(1e-3, -250.0));
        assert_eq!(complex("-1e-3").unwrap(), c(-1e-3, 0.0));
        assert!(complex("1+2j").is_err());
        assert!(complex("").is_err());
        assert!(complex("1 + 2i").is_err());
    }

    #[test]
    fn maps_and_functions() {
        let m = map("0.5,0.5,0,1", Domain::Disk).unwrap();
        assert!(m.is_affine());
        assert!(map("1,2,3", Domain::Disk).is_err());
        assert!(matches!(function("power:0.5*exp", None).unwrap(), Analytic::Product(v) if v.len() == 2));
        assert!(function("example-h", None).is_err());
        assert!(function("example-h", Some(0.5)).is_ok());
        assert!(function("poly:2,-3,1", None).is_ok());
        assert!(function("nope", None).is_err());
    }
}
