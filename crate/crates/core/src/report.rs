//! CSV output of sweep results.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::simulation::SweepResult;

pub const CSV_HEADER: &str = "design,n_r,n_rf,snr_db,bits,trials,mi_mean,mi_std,mi_sem";

/// Formats `x` with 6 significant digits in the style of C's `%g`:
/// fixed notation for exponents in `[-5, 6)`, scientific otherwise, trailing
/// zeros removed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // Round once in scientific form so the exponent reflects the rounding.
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes the CSV to any writer; rows come out in the result's sorted order.
pub fn write_csv<W: Write>(result: &SweepResult, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in result.rows() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.design,
            r.n_r,
            r.n_rf,
            format_sig6(r.snr_db),
            r.bits,
            r.trials,
            format_sig6(r.mi_mean),
            format_sig6(r.mi_std),
            format_sig6(r.mi_sem),
        )?;
    }
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv(result, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combiners::DesignTag;
    use crate::simulation::SweepRow;

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(-10.0), "-10");
        assert_eq!(format_sig6(24.714_285_1), "24.7143");
        assert_eq!(format_sig6(0.000_123_456_78), "0.000123457");
        assert_eq!(format_sig6(1.234_567e-7), "1.23457e-07");
        assert_eq!(format_sig6(123_456_789.0), "1.23457e+08");
        assert_eq!(format_sig6(999_999.5), "1e+06");
        assert_eq!(format_sig6(9.999_999), "10");
        assert_eq!(format_sig6(100_000.0), "100000");
    }

    #[test]
    fn empty_result_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&SweepResult::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_row_file() {
        let res = SweepResult::new(vec![SweepRow {
            design: DesignTag::SvdDft,
            n_r: 64,
            n_rf: 22,
            snr_db: 0.0,
            bits: 2,
            trials: 500,
            mi_mean: 30.123456789,
            mi_std: 1.5,
            mi_sem: 1.5 / 500f64.sqrt(),
        }]);
        let mut buf = Vec::new();
        write_csv(&res, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], "SVD_DFT,64,22,0,2,500,30.1235,1.5,0.067082");
    }

    #[test]
    fn unwritable_path_reports_it() {
        let path = Path::new("/nonexistent-dir/out.csv");
        let err = emit_csv(&SweepResult::default(), path).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }
}
