use bestprox_core::{modulus_of_convexity, power_type_constants};

use crate::args::{Format, ModulusArgs};
use crate::commands::{markdown_pairs, plain_pairs, write_file};
use crate::exit::CliError;
use crate::format::{csv_num, human};

pub fn run(args: &ModulusArgs) -> Result<(), CliError> {
    let delta = modulus_of_convexity(args.p, args.eps)?;
    let consts = power_type_constants(args.p)?;
    let lower = consts.lower_bound(args.eps);
    let header = ["p", "eps", "delta", "lower_bound", "c", "q"];
    let values = [args.p, args.eps, delta, lower, consts.c(), consts.q()];
    let csv_text = || {
        let row: Vec<String> = values.iter().map(|&v| csv_num(v)).collect();
        format!("{}\n{}\n", header.join(","), row.join(","))
    };
    if let Some(path) = &args.output.out {
        write_file(path, |w| {
            w.write_all(csv_text().as_bytes()).map_err(CliError::io)
        })?;
    }
    let rows: Vec<(&str, String)> = header
        .iter()
        .zip(values)
        .map(|(&k, v)| (if k == "c" { "C" } else { k }, human(v)))
        .collect();
    match args.output.format {
        Format::Csv => print!("{}", csv_text()),
        Format::Markdown => print!("{}", markdown_pairs(&rows)),
        Format::Plain => print!("{}", plain_pairs(&rows)),
    }
    Ok(())
}
