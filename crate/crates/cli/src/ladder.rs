//! Parsers for dyadic ladder notation (`2^-4..2^-10`, `2^6..2^12`) and
//! comma-separated integer lists.

use anyhow::{bail, Context, Result};

/// One `2^k` term with an integer exponent.
fn parse_dyadic(s: &str) -> Result<i32> {
    let rest = s
        .trim()
        .strip_prefix("2^")
        .with_context(|| format!("expected `2^<int>`, got `{s}`"))?;
    rest.parse::<i32>().with_context(|| format!("bad exponent in `{s}`"))
}

/// `2^a..2^b` expands to every dyadic value from `2^a` to `2^b` inclusive;
/// a bare `2^a` is a one-rung ladder.
pub fn parse_dyadic_ladder(s: &str) -> Result<Vec<f64>> {
    let exps = parse_exponent_range(s)?;
    Ok(exps.into_iter().map(|e| (e as f64).exp2()).collect())
}

/// Same expansion for positive integer ladders (e.g. torus sizes).
pub fn parse_dyadic_ladder_usize(s: &str) -> Result<Vec<usize>> {
    let exps = parse_exponent_range(s)?;
    exps.into_iter()
        .map(|e| {
            if e < 0 {
                bail!("ladder `{s}` must have nonnegative exponents");
            }
            Ok(1usize << e)
        })
        .collect()
}

fn parse_exponent_range(s: &str) -> Result<Vec<i32>> {
    let (lo, hi) = match s.split_once("..") {
        Some((l, h)) => (parse_dyadic(l)?, parse_dyadic(h)?),
        None => {
            let e = parse_dyadic(s)?;
            (e, e)
        }
    };
    let step: i32 = if hi >= lo { 1 } else { -1 };
    let mut out = Vec::new();
    let mut e = lo;
    loop {
        out.push(e);
        if e == hi {
            break;
        }
        e += step;
    }
    Ok(out)
}

/// `8,16,32` style lists.
pub fn parse_int_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|p| p.trim().parse::<i64>().with_context(|| format!("bad integer `{p}`")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descending_delta_ladder() {
        let l = parse_dyadic_ladder("2^-4..2^-6").unwrap();
        assert_eq!(l, vec![0.0625, 0.03125, 0.015625]);
    }

    #[test]
    fn single_rung() {
        assert_eq!(parse_dyadic_ladder("2^-8").unwrap(), vec![2f64.powi(-8)]);
    }

    #[test]
    fn ascending_n_ladder() {
        assert_eq!(parse_dyadic_ladder_usize("2^6..2^9").unwrap(), vec![64, 128, 256, 512]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_dyadic_ladder("3^-4..3^-6").is_err());
        assert!(parse_dyadic_ladder("2^x").is_err());
        assert!(parse_dyadic_ladder_usize("2^-2..2^2").is_err());
    }

    #[test]
    fn int_lists() {
        assert_eq!(parse_int_list("8, 16,32").unwrap(), vec![8, 16, 32]);
        assert!(parse_int_list("8,beta").is_err());
    }
}
