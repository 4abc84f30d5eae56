//! Number formatting and the trace CSV layout.

use std::io::Write;

use bestprox_core::solver::IterationTrace;
use bestprox_core::{Scalar, Side};

use crate::exit::CliError;

/// 17 significant digits: round-trip safe for `f64`.
pub fn csv_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.16e}")
}

/// 6 significant digits, fixed notation for moderate magnitudes and
/// scientific otherwise, trailing zeros trimmed.
pub fn human(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    // Round in scientific form first so the exponent reflects any carry.
    let sci = format!("{x:.5e}");
    let exp: i32 = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_fixed(&format!("{x:.decimals$}"))
    } else {
        trim_scientific(&sci)
    }
}

fn trim_fixed(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn trim_scientific(s: &str) -> String {
    match s.split_once('e') {
        Some((mantissa, exp)) => format!("{}e{exp}", trim_fixed(mantissa)),
        None => s.to_string(),
    }
}

/// `(a, b, …)` with [`human`] entries.
pub fn human_point(coords: &[f64]) -> String {
    let parts: Vec<String> = coords.iter().map(|&c| human(c)).collect();
    format!("({})", parts.join(", "))
}

/// Writes `step,side,coord_0,…,displacement,apriori,aposteriori`, one row
/// per iterate. The displacement at row n is `‖x_{n−1} − x_n‖` (empty at
/// step 0); the bound columns are filled at even steps ≥ 2 only.
pub fn write_trace_csv<S: Scalar>(
    trace: &IterationTrace<S>,
    out: impl Write,
) -> Result<(), CliError> {
    let iterates = trace.iterates();
    if iterates.is_empty() {
        return Err(CliError::Failure("trace does not keep its iterates".into()));
    }
    let dim = trace.space().dim();
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string(), "side".to_string()];
    header.extend((0..dim).map(|i| format!("coord_{i}")));
    header.extend(["displacement", "apriori", "aposteriori"].map(String::from));
    wtr.write_record(&header).map_err(CliError::io)?;
    let budgets = trace.budgets();
    for (step, x) in iterates.iter().enumerate() {
        let mut row = vec![step.to_string(), Side::of_step(step).to_string()];
        row.extend(x.to_f64s().into_iter().map(csv_num));
        row.push(match step {
            0 => String::new(),
            n => csv_num(trace.displacements()[n - 1].value),
        });
        let budget = (step >= 2 && step % 2 == 0).then(|| &budgets[step / 2 - 1]);
        match budget {
            Some(b) => {
                row.push(csv_num(b.apriori));
                row.push(csv_num(b.aposteriori));
            }
            None => row.extend([String::new(), String::new()]),
        }
        wtr.write_record(&row).map_err(CliError::io)?;
    }
    wtr.flush().map_err(CliError::io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bestprox_core::{make_example1, picard_iterate, CyclicMapSpec, Example1Params};

    #[test]
    fn human_uses_six_significant_digits() {
        assert_eq!(human(0.0), "0");
        assert_eq!(human(1.0), "1");
        assert_eq!(human(0.5), "0.5");
        assert_eq!(human(1.0 / 3.0), "0.333333");
        assert_eq!(human(250.75), "250.75");
        assert_eq!(human(123456.7), "123457");
        assert_eq!(human(1234567.0), "1.23457e6");
        assert_eq!(human(-2.5e-7), "-2.5e-7");
        assert_eq!(human(0.00012345678), "0.000123457");
        assert_eq!(human(999999.7), "1e6");
        assert_eq!(human(-0.0), "-0");
    }

    #[test]
    fn csv_numbers_round_trip() {
        for x in [1.0 / 3.0, 250.75, -1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(csv_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(csv_num(1.0 / 3.0), "3.3333333333333331e-1");
    }

    #[test]
    fn trace_layout() {
        let map: CyclicMapSpec = make_example1(Example1Params::new(0.5, 2.0).unwrap()).unwrap();
        let trace = picard_iterate(&map, &[1000.0, 8.0].into(), 4).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "step,side,coord_0,coord_1,displacement,apriori,aposteriori"
        );
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("0,A,1.0000000000000000e3,8.0000000000000000e0,,,"));
        assert!(lines[2].starts_with("1,B,") && lines[2].ends_with(",,"));
        let third: Vec<&str> = lines[3].split(',').collect();
        assert_eq!(
            &third[..4],
            &["2", "A", "2.5075000000000000e2", "2.0000000000000000e0"]
        );
        assert!(!third[5].is_empty() && !third[6].is_empty());
    }
}
