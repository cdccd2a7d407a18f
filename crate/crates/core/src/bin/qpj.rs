//! qpj <task> --config FILE --out DIR [--seed N] [--threads N]
//!
//! Exit codes: 0 ok, 2 configuration problem, 3 numeric failure.

use std::path::PathBuf;
use std::process::ExitCode;

use qpj::config::RunConfig;
use qpj::tasks::{run_task, Task, VERSION};
use qpj::Error;

struct Args {
    task: Task,
    config: PathBuf,
    out: PathBuf,
    seed: Option<u64>,
    threads: Option<usize>,
}

const USAGE: &str = "usage: qpj <task> --config FILE --out DIR [--seed N] [--threads N]
tasks: polarization admittance spectrum qtemp-map montecarlo fig1 fig3 fig4 fig5 fig6";

fn parse_args() -> Result<Args, String> {
    let mut argv = std::env::args().skip(1);
    let task: Task = match argv.next() {
        Some(t) if t == "--help" || t == "-h" => return Err(USAGE.to_string()),
        Some(t) if t == "--version" => return Err(format!("qpj {VERSION}")),
        Some(t) => t.parse()?,
        None => return Err(USAGE.to_string()),
    };
    let mut config = None;
    let mut out = None;
    let mut seed = None;
    let mut threads = None;
    while let Some(flag) = argv.next() {
        let mut value = || argv.next().ok_or(format!("{flag} needs a value"));
        match flag.as_str() {
            "--config" => config = Some(PathBuf::from(value()?)),
            "--out" => out = Some(PathBuf::from(value()?)),
            "--seed" => seed = Some(value()?.parse::<u64>().map_err(|e| e.to_string())?),
            "--threads" => threads = Some(value()?.parse::<usize>().map_err(|e| e.to_string())?),
            other => return Err(format!("unknown flag `{other}`\n{USAGE}")),
        }
    }
    Ok(Args {
        task,
        config: config.ok_or(format!("--config is required\n{USAGE}"))?,
        out: out.ok_or(format!("--out is required\n{USAGE}"))?,
        seed,
        threads,
    })
}

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

fn fail(err: &Error) -> ExitCode {
    eprintln!(
        "{{\"code\":{},\"kind\":\"{}\",\"message\":\"{}\"}}",
        err.exit_code(),
        err.kind(),
        json_escape(&err.to_string())
    );
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };

    let mut cfg = match RunConfig::parse_file(&args.config) {
        Ok(c) => c,
        Err(e) => {
            // anything wrong with the configuration itself is exit code 2
            eprintln!(
                "{{\"code\":2,\"kind\":\"{}\",\"message\":\"{}\"}}",
                e.kind(),
                json_escape(&e.to_string())
            );
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    } else if let Ok(env) = std::env::var("QPJ_THREADS") {
        if let Ok(n) = env.parse::<usize>() {
            cfg.threads = n;
        }
    }
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .ok();
    }

    match run_task(&cfg, args.task, &args.out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
