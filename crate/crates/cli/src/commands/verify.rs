use bestprox_core::suite::{run_suite_with, PropertyOutcome, Suite, SuiteConfig};

use crate::args::{Format, SuiteChoice, VerifyArgs};
use crate::commands::write_file;
use crate::exit::CliError;

fn suite(choice: SuiteChoice) -> Suite {
    match choice {
        SuiteChoice::Norms => Suite::Norms,
        SuiteChoice::Cyclic => Suite::Cyclic,
        SuiteChoice::Bounds => Suite::Bounds,
        SuiteChoice::Tables => Suite::Tables,
        SuiteChoice::All => Suite::All,
    }
}

/// One CSV record, without the trailing newline.
fn csv_row(o: &PropertyOutcome) -> String {
    let result = if o.passed { "pass" } else { "fail" };
    let suite = o.suite.to_string();
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    wtr.write_record([suite.as_str(), &o.name, result, &o.detail])
        .expect("writing to memory cannot fail");
    let bytes = wtr.into_inner().expect("writing to memory cannot fail");
    let line = String::from_utf8(bytes).expect("fields are UTF-8");
    line.strip_suffix('\n').unwrap_or(&line).to_string()
}

const CSV_HEADER: &str = "suite,property,result,detail";

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    if let Some(k) = args.declared_k {
        if !(k > 0.0 && k < 1.0) {
            return Err(CliError::Input(format!(
                "--declared-k must lie in (0, 1), got {k}"
            )));
        }
    }
    let cfg = SuiteConfig {
        declared_k: args.declared_k,
        ..SuiteConfig::with_seed(args.seed)
    };
    match args.output.format {
        Format::Csv => println!("{CSV_HEADER}"),
        Format::Markdown => println!("| suite | property | result | detail |\n|---|---|---|---|"),
        Format::Plain => {}
    }
    let outcomes = run_suite_with(suite(args.suite), &cfg, |o| match args.output.format {
        Format::Csv => println!("{}", csv_row(o)),
        Format::Markdown => println!(
            "| {} | {} | {} | {} |",
            o.suite,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail.replace('|', "\\|")
        ),
        Format::Plain => println!("{o}"),
    });
    if let Some(path) = &args.output.out {
        write_file(path, |w| {
            writeln!(w, "{CSV_HEADER}").map_err(CliError::io)?;
            for o in &outcomes {
                writeln!(w, "{}", csv_row(o)).map_err(CliError::io)?;
            }
            Ok(())
        })?;
    }
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| format!("{}/{}", o.suite, o.name))
        .collect();
    eprintln!(
        "{} of {} properties passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "failing properties: {}",
            failed.join(", ")
        )))
    }
}
