//! CSV formatting shared by every command. Floats are written with 17
//! significant digits so that reruns compare byte for byte.

use std::fmt::Write;

/// `{:.16e}` for finite values; `NaN`, `inf` and `-inf` otherwise.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// A CSV document built row by row. Fields are never quoted, so they must
/// not contain commas or newlines.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Self {
            text: String::new(),
            columns: header.len(),
        };
        c.text.push_str(&header.join(","));
        c.text.push('\n');
        c
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "CSV row width");
        debug_assert!(fields.iter().all(|f| !f.contains([',', '\n'])));
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn rows() {
        let mut c = Csv::new(&["n", "logw"]);
        c.row(&["0".into(), fmt_f64(0.5)]);
        assert_eq!(c.as_str(), "n,logw\n0,5.0000000000000000e-1\n");
    }
}
