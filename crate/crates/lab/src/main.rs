use std::path::PathBuf;
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgMatches};
use flatbeam::commands::{execute, Command};
use flatbeam::config::Config;

fn cli() -> clap::Command {
    let mut root = clap::Command::new("flatbeam")
        .about("Numerics for the singular Child-Langmuir problem -Δu + j(x)/√u = 0")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for cmd in Command::ALL {
        let mut sub = clap::Command::new(cmd.name())
            .about(cmd.about())
            .arg(
                Arg::new("config")
                    .long("config")
                    .value_name("FILE")
                    .help("key=value file; flags override it")
                    .value_parser(value_parser!(PathBuf)),
            )
            .arg(Arg::new("outdir").long("outdir").value_name("DIR").help("output root (default: runs)"))
            .arg(Arg::new("run").long("run").value_name("NAME").help("run directory name instead of a timestamp"));
        for key in cmd.keys() {
            sub = sub.arg(Arg::new(*key).long(*key).value_name("VALUE").allow_hyphen_values(true));
        }
        root = root.subcommand(sub);
    }
    root
}

fn flags(m: &ArgMatches, keys: &[&str]) -> Vec<(String, String)> {
    keys.iter()
        .chain(["outdir"].iter())
        .filter_map(|k| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
        .collect()
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, m) = matches.subcommand().expect("subcommand is required");
    let cmd = Command::from_name(name).expect("every subcommand is registered");
    let file = m.get_one::<PathBuf>("config");
    let cfg = match Config::load(file.map(PathBuf::as_path), flags(m, cmd.keys()), cmd.name(), cmd.keys()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("flatbeam {name}: {e}");
            return ExitCode::from(e.code() as u8);
        }
    };
    let outdir = PathBuf::from(cfg.raw("outdir").unwrap_or("runs"));
    let (dir, result) = execute(cmd, &cfg, &outdir, m.get_one::<String>("run").map(String::as_str));
    if let Some(d) = dir {
        println!("{}", d.display());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flatbeam {name}: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
