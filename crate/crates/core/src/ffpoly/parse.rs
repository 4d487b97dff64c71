use super::{Field, Poly};
use crate::error::{Error, Result};

/// Parses terms `c*T^k`, `c*T`, `T^k`, `T` and `c` joined by `+`/`-`.
/// Whitespace is ignored and coefficients are reduced mod p.
pub fn parse_poly(text: &str, field: Field) -> Result<Poly> {
    let src: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    let fail = |reason: &str| Error::Parse { text: text.to_string(), reason: reason.to_string() };
    if src.is_empty() {
        return Err(fail("empty input"));
    }
    let p = field.p() as u128;
    let mut coeffs: Vec<u128> = Vec::new();
    let mut pos = 0;
    let mut first = true;
    while pos < src.len() {
        let mut negative = false;
        match src[pos] {
            '+' | '-' => {
                negative = src[pos] == '-';
                pos += 1;
            }
            _ if !first => return Err(fail("expected '+' or '-' between terms")),
            _ => {}
        }
        first = false;

        let digits_start = pos;
        while pos < src.len() && src[pos].is_ascii_digit() {
            pos += 1;
        }
        let coeff: Option<u128> = if pos > digits_start {
            let s: String = src[digits_start..pos].iter().collect();
            Some(s.parse::<u128>().map_err(|_| fail("coefficient too large to reduce"))? % p)
        } else {
            None
        };

        let mut power = 0usize;
        let has_star = pos < src.len() && src[pos] == '*';
        if has_star {
            if coeff.is_none() {
                return Err(fail("'*' without a coefficient"));
            }
            pos += 1;
        }
        if pos < src.len() && src[pos] == 'T' {
            pos += 1;
            power = 1;
            if pos < src.len() && src[pos] == '^' {
                pos += 1;
                let start = pos;
                while pos < src.len() && src[pos].is_ascii_digit() {
                    pos += 1;
                }
                if pos == start {
                    return Err(fail("missing exponent after '^'"));
                }
                let s: String = src[start..pos].iter().collect();
                power = s.parse().map_err(|_| fail("exponent too large"))?;
                if power > 1 << 20 {
                    return Err(fail("exponent too large"));
                }
            }
        } else if has_star {
            return Err(fail("expected 'T' after '*'"));
        } else if coeff.is_none() {
            return Err(fail("expected a coefficient or 'T'"));
        }

        let c = coeff.unwrap_or(1);
        let c = if negative { (p - c) % p } else { c };
        if coeffs.len() <= power {
            coeffs.resize(power + 1, 0);
        }
        coeffs[power] = (coeffs[power] + c) % p;
    }
    Ok(Poly::new(field, coeffs.into_iter().map(|c| c as u32).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Field {
        Field::new(3).unwrap()
    }

    #[test]
    fn accepts_grammar() {
        assert_eq!(parse_poly("T^2+T+1", f3()).unwrap().coeffs(), &[1, 1, 1]);
        assert_eq!(parse_poly("2*T^3+T", f3()).unwrap().coeffs(), &[0, 1, 0, 2]);
        assert!(parse_poly("0", f3()).unwrap().is_zero());
        assert_eq!(parse_poly(" - T + 4 ", f3()).unwrap().coeffs(), &[1, 2]);
        assert_eq!(parse_poly("T^2 + 2*T^2", f3()).unwrap().coeffs(), &[] as &[u32]);
        assert_eq!(parse_poly("7*T", Field::new(5).unwrap()).unwrap().coeffs(), &[0, 2]);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["", "T^", "2*", "T T", "*T", "x+1", "2**T", "T^2+", "++T"] {
            assert!(parse_poly(bad, f3()).is_err(), "{bad:?} should fail");
        }
        assert!(parse_poly("999999999999999999999999999999999999999999", f3()).is_err());
    }
}
