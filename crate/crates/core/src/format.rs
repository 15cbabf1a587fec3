//! Fixed-precision number formatting and the two-column trace CSV.

use std::io::{Read, Write};

use crate::{Error, Result};

/// Default number of significant digits for emitted floats.
pub const DEFAULT_DIGITS: usize = 9;

/// Formats `x` with `digits` significant digits, `%g` style: plain
/// notation for moderate exponents, scientific otherwise, trailing zeros
/// trimmed.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // exponent after rounding to the requested precision
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Reads a `time_s,value` CSV with one header line.
pub fn read_trace_csv<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "time_s" {
        return Err(Error::InvalidData(format!(
            "expected header `time_s,value`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut time = Vec::new();
    let mut value = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| Error::InvalidData(format!("row {}: `{}`: {e}", line + 2, &record[i])))
        };
        time.push(parse(0)?);
        value.push(parse(1)?);
    }
    Ok((time, value))
}

pub fn write_trace_csv<W: Write>(
    mut out: W,
    value_name: &str,
    time: &[f64],
    value: &[f64],
    digits: usize,
) -> std::io::Result<()> {
    writeln!(out, "time_s,{value_name}")?;
    for (t, v) in time.iter().zip(value) {
        writeln!(out, "{},{}", format_sig(*t, digits), format_sig(*v, digits))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats() {
        assert_eq!(format_sig(0.0, 9), "0");
        assert_eq!(format_sig(0.03, 9), "0.03");
        assert_eq!(format_sig(-140.0, 9), "-140");
        assert_eq!(format_sig(1.0 / 3.0, 9), "0.333333333");
        assert_eq!(format_sig(7.18e-5, 9), "7.18e-5");
        assert_eq!(format_sig(123456789012.0, 9), "1.23456789e11");
        assert_eq!(format_sig(9.9999999996, 9), "10");
    }

    proptest! {
        #[test]
        fn nine_digits_parse_back_close(x in -1e12f64..1e12) {
            let y: f64 = format_sig(x, 9).parse().unwrap();
            prop_assert!((x - y).abs() <= 5e-9 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn trace_round_trip() {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, "torque", &[0.0, 0.005], &[1.5, -2.25], 9).unwrap();
        let (t, v) = read_trace_csv(&buf[..]).unwrap();
        assert_eq!(t, vec![0.0, 0.005]);
        assert_eq!(v, vec![1.5, -2.25]);
    }

    #[test]
    fn trace_rejects_bad_input() {
        assert!(read_trace_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_trace_csv("time_s,value\n1,x\n".as_bytes()).is_err());
    }
}
