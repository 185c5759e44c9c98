//! Number and CSV formatting. Everything here is locale independent and
//! deterministic.

use std::io::{self, Write};

/// `x` rounded to `digits` significant digits, fixed notation unless the
/// magnitude is outside [1e-4, 1e15).
pub fn significant(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..15).contains(&exp) {
        return format!("{:.*e}", digits - 1, x);
    }
    // Rounding can carry into the next decade (9.9999996 -> 10.00000).
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let carried = s.trim_start_matches('-').split('.').next().map_or(0, str::len) as i32;
    if exp >= 0 && carried > exp + 1 && decimals > 0 {
        return format!("{x:.*}", decimals - 1);
    }
    s
}

pub fn fixed(x: f64, decimals: usize) -> String {
    format!("{x:.decimals$}")
}

/// A spin quantum number as a plain decimal (`1.5`, not `3/2`).
pub fn spin(j: f64) -> String {
    if j.fract() == 0.0 {
        format!("{j:.0}")
    } else {
        format!("{j:.1}")
    }
}

pub fn write_csv(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(significant(1.5, 6), "1.50000");
        assert_eq!(significant(0.0862081, 3), "0.0862");
        assert_eq!(significant(-0.2, 6), "-0.200000");
        assert_eq!(significant(0.0, 3), "0.00");
        assert_eq!(significant(9.9999996, 6), "10.0000");
        assert_eq!(significant(123456.7, 6), "123457");
        assert_eq!(significant(3.2e-7, 3), "3.20e-7");
    }

    #[test]
    fn spin_text() {
        assert_eq!(spin(10.0), "10");
        assert_eq!(spin(1.5), "1.5");
    }
}
