//! Matrix text format: a "rows cols" header followed by `rows*cols`
//! whitespace-separated complex entries such as `1`, `-i`, `0.5+0.5i`.
//! Lines starting with `#` are ignored.

use super::{CMatrix, LinalgError, Result, C64};

const SIG_DIGITS: usize = 12;
// Entries smaller than this print as 0 so rounding noise does not leak into
// regression output.
const PRINT_FLOOR: f64 = 1e-14;

fn format_real(x: f64) -> String {
    if x.abs() < PRINT_FLOOR {
        return "0".into();
    }
    let rounded: f64 = format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x);
    format!("{rounded}")
}

pub fn format_complex(z: C64) -> String {
    let re = format_real(z.re);
    let im = format_real(z.im);
    match (re.as_str(), im.as_str()) {
        (_, "0") => re,
        ("0", "1") => "i".into(),
        ("0", "-1") => "-i".into(),
        ("0", _) => format!("{im}i"),
        (_, "1") => format!("{re}+i"),
        (_, "-1") => format!("{re}-i"),
        _ if im.starts_with('-') => format!("{re}{im}i"),
        _ => format!("{re}+{im}i"),
    }
}

pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format_complex(m.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn parse_real(s: &str, token: &str) -> Result<f64> {
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => s
            .parse::<f64>()
            .map_err(|_| LinalgError::Parse(format!("bad complex entry '{token}'"))),
    }
}

pub fn parse_complex(token: &str) -> Result<C64> {
    let s = token.trim();
    if s.is_empty() {
        return Err(LinalgError::Parse("empty complex entry".into()));
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        let re: f64 = s.parse().map_err(|_| LinalgError::Parse(format!("bad complex entry '{token}'")))?;
        return Ok(C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k], token)?, parse_real(&body[k..], token)?),
        None => (0.0, parse_real(body, token)?),
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(LinalgError::Parse(format!("non-finite entry '{token}'")));
    }
    Ok(C64::new(re, im))
}

pub fn parse_matrix_text(text: &str) -> Result<CMatrix> {
    let mut tokens = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(str::split_whitespace);
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| LinalgError::Parse(format!("missing {what} count")))?
            .parse()
            .map_err(|_| LinalgError::Parse(format!("bad {what} count")))
    };
    let rows = dim("row")?;
    let cols = dim("column")?;
    let entries = tokens.map(parse_complex).collect::<Result<Vec<_>>>()?;
    if entries.len() != rows * cols {
        return Err(LinalgError::Parse(format!(
            "expected {} entries, found {}",
            rows * cols,
            entries.len()
        )));
    }
    CMatrix::new(rows, cols, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn parses_spec_forms() {
        assert_eq!(parse_complex("1").unwrap(), c(1.0, 0.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("0.5+0.5i").unwrap(), c(0.5, 0.5));
        assert_eq!(parse_complex("0.5-2i").unwrap(), c(0.5, -2.0));
        assert_eq!(parse_complex("1e-3+2.5e+2i").unwrap(), c(1e-3, 250.0));
        assert_eq!(parse_complex("-1.5e-2i").unwrap(), c(0.0, -0.015));
        assert_eq!(parse_complex("3-i").unwrap(), c(3.0, -1.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+xi").is_err());
    }

    #[test]
    fn formats_with_twelve_significant_digits() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(format_complex(c(s, 0.0)), "0.707106781187");
        assert_eq!(format_complex(c(0.0, -1.0)), "-i");
        assert_eq!(format_complex(c(0.5, -0.25)), "0.5-0.25i");
        assert_eq!(format_complex(c(-0.0, 1e-17)), "0");
        assert_eq!(format_complex(c(2.0, 1.0)), "2+i");
    }

    #[test]
    fn matrix_round_trip() {
        let m = CMatrix::new(2, 3, vec![c(1.0, 0.0), c(0.0, -1.0), c(0.5, 0.5), c(-2.0, 0.0), c(0.0, 0.0), c(1e-3, -4.0)]).unwrap();
        let text = format_matrix(&m);
        assert_eq!(parse_matrix_text(&text).unwrap(), m);
        assert!(parse_matrix_text("2 2\n1 0\n0").is_err());
        assert_eq!(parse_matrix_text("# comment\n1 1\n-i\n").unwrap()[(0, 0)], c(0.0, -1.0));
    }
}
