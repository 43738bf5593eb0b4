use std::path::Path;

use crate::error::Result;

use super::config::OutputFormat;
use super::interferometer::SweepRecord;

pub const CSV_HEADER: &str = "theta_rad,variant,phase_rad,gamma_d_rad,gamma_g_rad";

const SIG_DIGITS: usize = 12;

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped,
/// scientific notation outside `[1e-5, 1e12)`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Records in the deterministic output order: up before mirror, θ ascending.
pub fn ordered(records: &[SweepRecord]) -> Vec<SweepRecord> {
    let mut out = records.to_vec();
    out.sort_by(|a, b| a.loop_variant.cmp(&b.loop_variant).then(a.theta.total_cmp(&b.theta)));
    out
}

pub fn render_csv(records: &[SweepRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in ordered(records) {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            format_sig(r.theta),
            r.loop_variant,
            format_sig(r.phase_measured),
            format_sig(r.gamma_dynamic),
            format_sig(r.gamma_geometric)
        ));
    }
    s
}

/// JSON array of records; floats keep full precision so the file reads
/// back to identical records.
pub fn render_json(records: &[SweepRecord]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ordered(records))?;
    s.push('\n');
    Ok(s)
}

pub fn emit_results(records: &[SweepRecord], path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => render_csv(records),
        OutputFormat::Json => render_json(records)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::SweepVariant;
    use std::f64::consts::PI;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(PI), "3.14159265359");
        assert_eq!(format_sig(-PI / 2.0), "-1.57079632679");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(1.234e-7), "1.234e-7");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(0.000123456789012345), "0.000123456789012");
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(render_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn rows_are_sorted() {
        let rec = |theta, v| SweepRecord {
            theta,
            phase_measured: 0.0,
            gamma_dynamic: 0.0,
            gamma_geometric: 0.0,
            loop_variant: v,
        };
        let csv = render_csv(&[rec(2.0, SweepVariant::Mirror), rec(1.0, SweepVariant::Up), rec(0.5, SweepVariant::Up)]);
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows, ["0.5,up,0,0,0", "1,up,0,0,0", "2,mirror,0,0,0"]);
    }

    #[test]
    fn json_round_trip() {
        let recs = vec![SweepRecord {
            theta: PI / 18.0,
            phase_measured: -PI / 2.0,
            gamma_dynamic: -0.123_456_789_012_345_67,
            gamma_geometric: 1.0 / 3.0,
            loop_variant: SweepVariant::Up,
        }];
        let back: Vec<SweepRecord> = serde_json::from_str(&render_json(&recs).unwrap()).unwrap();
        assert_eq!(back, recs);
    }
}
