use bestprox_core::oracle::{
    reproduce_table_with, Arithmetic, TableKind, TableRequest, TableResult,
};
use bestprox_core::table_io::{eps_label, grid_markdown, p_label, write_grid_csv, Grid};

use crate::args::{ArithmeticChoice, Criterion, Format, MapChoice, TableArgs};
use crate::commands::write_file;
use crate::exit::CliError;

/// Largest tolerated |computed − published| per table kind.
pub fn tolerance(kind: TableKind) -> i64 {
    match kind {
        TableKind::APosteriori => 2,
        TableKind::APriori => 4,
    }
}

pub fn run(args: &TableArgs) -> Result<(), CliError> {
    let MapChoice::Example1 = args.map.map;
    let kind = match args.criterion {
        Criterion::Apriori => TableKind::APriori,
        Criterion::Aposteriori => TableKind::APosteriori,
    };
    let request = TableRequest {
        kind,
        lambda: args.map.lambda,
        x0: args.x0.0.clone().into(),
        eps: args.eps.0.clone(),
        p: args.p.0.clone(),
        arithmetic: match args.arithmetic {
            ArithmeticChoice::Double => Arithmetic::Double,
            ArithmeticChoice::Extended => Arithmetic::Extended,
        },
        max_steps: args.max_steps,
    };
    let result = reproduce_table_with(&request)?;
    let sections = sections(&result, args.compare_paper);

    if let Some(path) = &args.output.out {
        write_file(path, |w| {
            w.write_all(render(&sections, Format::Csv)?.as_bytes())
                .map_err(CliError::io)
        })?;
    }
    print!("{}", render(&sections, args.output.format)?);

    if !args.compare_paper {
        return Ok(());
    }
    let Some(deltas) = &result.deltas else {
        eprintln!("note: no published counts exist for this scenario; nothing to compare");
        return Ok(());
    };
    let tol = tolerance(kind);
    let worst = deltas.iter().filter_map(|(_, _, d)| *d).map(i64::abs).max();
    match worst {
        Some(w) if w > tol => Err(CliError::Failure(format!(
            "{} counts differ from the published grid by up to {w} (tolerance ±{tol})",
            kind.name()
        ))),
        _ => Ok(()),
    }
}

struct Section {
    title: String,
    grid: Grid<String>,
}

fn sections(result: &TableResult, compare: bool) -> Vec<Section> {
    let mut out = vec![Section {
        title: format!("computed {} counts", result.kind.name()),
        grid: result.counts.map(|_, _, c| c.to_string()),
    }];
    if compare {
        let cell = |v: &Option<i64>| v.map_or_else(String::new, |v| v.to_string());
        if let (Some(paper), Some(deltas)) = (&result.paper_counts, &result.deltas) {
            out.push(Section {
                title: "published counts".into(),
                grid: paper.map(|_, _, v| cell(v)),
            });
            out.push(Section {
                title: "delta (computed - published)".into(),
                grid: deltas.map(|_, _, v| cell(v)),
            });
        }
    }
    out
}

fn render(sections: &[Section], format: Format) -> Result<String, CliError> {
    let titled = sections.len() > 1;
    let mut out = String::new();
    for (i, s) in sections.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match format {
            Format::Csv => {
                if titled {
                    out.push_str(&format!("# {}\n", s.title));
                }
                let mut buf = Vec::new();
                write_grid_csv(&s.grid, &mut buf)?;
                out.push_str(&String::from_utf8(buf).expect("CSV output is UTF-8"));
            }
            Format::Markdown => {
                out.push_str(&format!("**{}**\n\n", s.title));
                out.push_str(&grid_markdown(&s.grid));
            }
            Format::Plain => {
                out.push_str(&format!("{}\n", s.title));
                out.push_str(&plain_grid(&s.grid));
            }
        }
    }
    Ok(out)
}

/// Right-aligned columns under an `eps \ p` header.
fn plain_grid(grid: &Grid<String>) -> String {
    let mut rows: Vec<Vec<String>> = vec![std::iter::once("eps \\ p".to_string())
        .chain(grid.p().iter().map(|&p| p_label(p)))
        .collect()];
    for (row, &e) in grid.rows().iter().zip(grid.eps()) {
        rows.push(
            std::iter::once(eps_label(e))
                .chain(row.iter().cloned())
                .collect(),
        );
    }
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for r in &rows {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, &w))| {
                if j == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        s.push_str(cells.join("  ").trim_end());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_grid_aligns_columns() {
        let g = Grid::new(
            vec![1e-2, 1e-10],
            vec![2.0, 20.0],
            vec![
                vec!["30".into(), "266".into()],
                vec!["84".into(), "798".into()],
            ],
        )
        .unwrap();
        assert_eq!(
            plain_grid(&g),
            "eps \\ p   2   20\n1e-2     30  266\n1e-10    84  798\n"
        );
    }

    #[test]
    fn tolerances_match_the_acceptance_bands() {
        assert_eq!(tolerance(TableKind::APosteriori), 2);
        assert_eq!(tolerance(TableKind::APriori), 4);
    }
}
