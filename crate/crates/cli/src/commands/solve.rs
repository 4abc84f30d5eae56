use bestprox_core::oracle::{
    reference_best_proximity, ReferenceMethod, REFERENCE_CAP, REFERENCE_TOL,
};
use bestprox_core::solver::{run_with_stop, IterationTrace, StopError, StopKind, StopRule};
use bestprox_core::{make_example1, CyclicMapSpec, Example1Params, Extended, Scalar, Vector};

use crate::args::{ArithmeticChoice, Criterion, Format, MapChoice, SolveArgs};
use crate::commands::{markdown_pairs, plain_pairs, write_file};
use crate::exit::CliError;
use crate::format::{human, human_point, write_trace_csv};

pub(crate) fn stop_kind(c: Criterion) -> StopKind {
    match c {
        Criterion::Apriori => StopKind::APriori,
        Criterion::Aposteriori => StopKind::APosteriori,
    }
}

pub(crate) fn build_map<S: Scalar>(
    choice: MapChoice,
    lambda: f64,
    p: f64,
) -> Result<CyclicMapSpec<S>, CliError> {
    match choice {
        MapChoice::Example1 => Ok(make_example1(Example1Params::new(lambda, p)?)?),
    }
}

pub fn run(args: &SolveArgs) -> Result<(), CliError> {
    let rule = StopRule::new(stop_kind(args.criterion), args.eps, args.max_steps)?;
    match args.arithmetic {
        ArithmeticChoice::Double => solve_in::<f64>(args, &rule),
        ArithmeticChoice::Extended => solve_in::<Extended>(args, &rule),
    }
}

fn solve_in<S: Scalar>(args: &SolveArgs, rule: &StopRule) -> Result<(), CliError> {
    let map = build_map::<S>(args.map.map, args.map.lambda, args.p)?;
    let x0 = Vector::<S>::from_f64s(&args.x0.0);
    map.require_in_a(&x0)?;
    let outcome = match run_with_stop(&map, &x0, rule) {
        Ok(out) => out,
        Err(StopError::Invalid(e)) => return Err(e.into()),
        Err(StopError::BudgetExhausted { cap, needed, trace }) => {
            write_trace(args, &trace)?;
            let why = match needed {
                Some(n) => {
                    format!("the a priori rule needs {n} steps, more than --max-steps {cap}")
                }
                None => format!("the stopping criterion did not hold within --max-steps {cap}"),
            };
            return Err(CliError::Failure(format!("no convergence: {why}")));
        }
    };
    write_trace(args, &outcome.trace)?;
    let budget = outcome.final_budget()?;
    let approx = outcome.approx.to_f64s();

    let mut rows: Vec<(&str, String)> = vec![
        ("map", format!("{:?}", args.map.map).to_lowercase()),
        ("lambda", human(args.map.lambda)),
        ("p", human(args.p)),
        ("x0", human_point(&args.x0.0)),
        ("criterion", format!("{:?}", args.criterion).to_lowercase()),
        ("eps", human(args.eps)),
        ("stopped_at", outcome.stopped_at.to_string()),
        ("approximation", human_point(&approx)),
        ("apriori_bound", human(budget.apriori)),
        ("aposteriori_bound", human(budget.aposteriori)),
    ];
    if !args.no_oracle {
        let plain = build_map::<f64>(args.map.map, args.map.lambda, args.p)?;
        match reference_best_proximity(
            &plain,
            &args.x0.0.clone().into(),
            REFERENCE_TOL,
            REFERENCE_CAP,
        ) {
            Ok(r) => {
                let xi = Vector::<S>::from_f64s(r.xi.coords());
                let err = map.space().distance(&outcome.approx, &xi)?.to_f64();
                let method = match r.method {
                    ReferenceMethod::Exact => "exact",
                    ReferenceMethod::IteratedToPrecision => "iterated",
                };
                rows.push((
                    "reference",
                    format!("{} [{method}]", human_point(&r.xi.to_f64s())),
                ));
                rows.push(("true_error", human(err)));
            }
            Err(e) => rows.push(("reference", format!("unavailable: {e}"))),
        }
    }
    match args.output.format {
        Format::Plain => print!("{}", plain_pairs(&rows)),
        Format::Markdown => print!("{}", markdown_pairs(&rows)),
        Format::Csv => {
            if args.output.out.is_none() {
                write_trace_csv(&outcome.trace, std::io::stdout().lock())?;
            }
            eprint!("{}", plain_pairs(&rows));
        }
    }
    Ok(())
}

fn write_trace<S: Scalar>(args: &SolveArgs, trace: &IterationTrace<S>) -> Result<(), CliError> {
    match &args.output.out {
        Some(path) => write_file(path, |w| write_trace_csv(trace, w)),
        None => Ok(()),
    }
}
