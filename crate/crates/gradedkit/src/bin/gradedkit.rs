//! Command-line front end: parse a declaration file and run one command.
//!
//! Usage:
//!   gradedkit check <file> [--json out.json]
//!   gradedkit derive <file> --name <groupoid>
//!   gradedkit lift <file> --name <chart|action> tangent|cotangent|multivector|higher <k>
//!   gradedkit bracket <file> <Q> <s1> <s2>
//!   gradedkit homogenize <file> --name <action>
//!
//! Exit code 0 when every check passes, 1 when any fails, 2 on parse or
//! usage errors.

use gradedkit::dsl::{self, Command, Output};
use std::process::ExitCode;
use std::time::Instant;

struct Args {
    command: String,
    file: String,
    name: Option<String>,
    json: Option<String>,
    rest: Vec<String>,
}

fn usage() -> ExitCode {
    eprintln!(
        "usage: gradedkit check|derive|lift|bracket|homogenize <file> [--name N] [--json out.json] [args...]"
    );
    ExitCode::from(2)
}

fn parse_args() -> Option<Args> {
    let mut argv = std::env::args().skip(1);
    let command = argv.next()?;
    let file = argv.next()?;
    let mut name = None;
    let mut json = None;
    let mut rest = Vec::new();
    while let Some(a) = argv.next() {
        match a.as_str() {
            "--name" => name = Some(argv.next()?),
            "--json" => json = Some(argv.next()?),
            _ => rest.push(a),
        }
    }
    Some(Args {
        command,
        file,
        name,
        json,
        rest,
    })
}

fn main() -> ExitCode {
    let Some(args) = parse_args() else {
        return usage();
    };
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read `{}`: {e}", args.file);
            return ExitCode::from(2);
        }
    };
    let started = Instant::now();
    let doc = match dsl::parse(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{}: {e}", args.file);
            return ExitCode::from(2);
        }
    };
    let command = match args.command.as_str() {
        "check" => Command::Check,
        "derive" => match args.name {
            Some(name) => Command::Derive { name },
            None => return usage(),
        },
        "lift" => {
            let Some(name) = args.name else {
                return usage();
            };
            let Some(kind) = args.rest.first().cloned() else {
                return usage();
            };
            let order = args.rest.get(1).and_then(|s| s.parse().ok());
            Command::Lift { name, kind, order }
        }
        "bracket" => {
            if args.rest.len() != 3 {
                return usage();
            }
            Command::Bracket {
                q: args.rest[0].clone(),
                a: args.rest[1].clone(),
                b: args.rest[2].clone(),
            }
        }
        "homogenize" => match args.name {
            Some(name) => Command::Homogenize { name },
            None => return usage(),
        },
        _ => return usage(),
    };
    match dsl::run(&doc, &command) {
        Ok(Output::Report(report)) => {
            print!("{report}");
            if let Some(path) = args.json {
                if let Err(e) = std::fs::write(&path, report.to_json()) {
                    eprintln!("error: cannot write `{path}`: {e}");
                    return ExitCode::from(2);
                }
            }
            eprintln!("elapsed: {:?}", started.elapsed());
            ExitCode::from(report.exit_code() as u8)
        }
        Ok(Output::Text(text)) => {
            print!("{text}");
            eprintln!("elapsed: {:?}", started.elapsed());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
