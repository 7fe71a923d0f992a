//! Parser for set expressions: finite unions of half-open intervals in the
//! grammar `interval := "[" num "," num ")"`, joined by `∪` or `+`.

use freelevy_core::levy_basis::SetExpr;

pub fn parse_set_expr(input: &str) -> Result<SetExpr, String> {
    let mut intervals = Vec::new();
    let trimmed = input.trim();
    if trimmed.is_empty() || trimmed == "∅" {
        return Ok(SetExpr::empty());
    }
    for part in trimmed.split(['∪', '+']) {
        let part = part.trim();
        let inner = part
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| format!("interval `{part}` must have the form [lo,hi)"))?;
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| format!("interval `{part}` needs two comma-separated endpoints"))?;
        let lo: f64 = lo.trim().parse().map_err(|e| format!("bad number in `{part}`: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("bad number in `{part}`: {e}"))?;
        if !(lo < hi) {
            return Err(format!("interval `{part}` is empty (lo >= hi)"));
        }
        intervals.push((lo, hi));
    }
    Ok(SetExpr::normalize(&intervals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_unions() {
        let s = parse_set_expr("[0,1)∪[2,3)").unwrap();
        assert_eq!(s.intervals, vec![(0.0, 1.0), (2.0, 3.0)]);
        let s = parse_set_expr("[0, 1) + [1, 2)").unwrap();
        assert_eq!(s.intervals, vec![(0.0, 2.0)]);
        assert!(parse_set_expr("[1,0)").is_err());
        assert!(parse_set_expr("(0,1)").is_err());
        assert!(parse_set_expr("").unwrap().is_empty());
    }
}
