//! CSV output: header row, comma separator, floats with 17 significant digits.

use std::io::Write;

/// `x` in scientific notation with 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trips() {
        for x in [0.1, -1.0 / 3.0, 6.02e23, 0.0] {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(0.5), "5.0000000000000000e-1");
    }
}
