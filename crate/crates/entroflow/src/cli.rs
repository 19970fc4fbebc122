//! Argument parsing, config files and dispatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::commands;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "entroflow", version, about = "Entropy methods lab: flows, spectra, optimal constants, sphere branches")]
pub struct Cli {
    /// JSON file whose keys override the flags of the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized multi-starts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form and quadrature constants as JSON.
    #[command(args_override_self = true)]
    Constants(ConstantsArgs),
    /// An explicit profile as CSV `r,value`.
    #[command(args_override_self = true)]
    Profile(ProfileArgs),
    /// Time integration with diagnostics as CSV.
    #[command(args_override_self = true)]
    Flow(FlowArgs),
    /// Eigenvalues of a linearized operator as JSON.
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// A solution branch on the sphere as CSV.
    #[command(args_override_self = true)]
    Branch(BranchArgs),
    /// κ_p over a list of exponents as CSV.
    #[command(args_override_self = true)]
    Kappa(KappaArgs),
    /// Felli–Schneider classification over an (a, b) rectangle as CSV.
    #[command(name = "ckn-map", args_override_self = true)]
    CknMap(CknMapArgs),
    /// Evaluates a functional on a profile CSV.
    #[command(args_override_self = true)]
    Check(CheckArgs),
    /// Writes the data behind a figure into a directory.
    #[command(args_override_self = true)]
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 1.0)]
    pub c_star: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a_exp: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eps0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub chi: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    /// Artificial dimension for α_FS.
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Tail constant A of the threshold time.
    #[arg(long)]
    pub a_tail: Option<f64>,
    /// Entropy bound G of the threshold time.
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    Barenblatt,
    Sobolev,
    Gns,
    Ckn,
    SelfSimilar,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[arg(long, value_enum)]
    pub kind: ProfileKind,
    #[arg(long, default_value_t = 3)]
    pub d: u32,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Rescale to this mass (Barenblatt only).
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long, default_value_t = 400)]
    pub nodes: usize,
    #[arg(long, default_value_t = 50.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 1.5)]
    pub stretch: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlowKind {
    Fd,
    Rfd,
    Heat,
    Ou,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PotentialName {
    Harmonic,
    DoubleWell,
    Quartic,
}

#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    #[arg(long, value_enum)]
    pub kind: FlowKind,
    #[arg(long, default_value_t = 3)]
    pub d: u32,
    #[arg(long, default_value_t = 0.8)]
    pub m: f64,
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Initial datum as CSV `r,value` (x,value for the OU flow).
    #[arg(long)]
    pub datum: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary: fitted rates, threshold time, mass drift.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    /// θ of the time scheme; 1 is implicit Euler.
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    /// Mesh nodes (cells for linear flows); a flow-specific default when absent.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Outer radius, or the potential depth for the OU flow.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = PotentialName::Harmonic)]
    pub potential: PotentialName,
    /// Target ε of the empirical threshold time (rescaled flow).
    #[arg(long)]
    pub eps: Option<f64>,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Operator {
    Hp,
    Ou,
    Sphere,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long, value_enum)]
    pub operator: Operator,
    #[arg(long, default_value_t = 3)]
    pub d: u32,
    #[arg(long, default_value_t = 0.8)]
    pub m: f64,
    #[arg(long, default_value_t = 0)]
    pub level: u8,
    #[arg(long)]
    pub mesh: Option<usize>,
    /// Number of eigenvalues reported (sphere).
    #[arg(long, default_value_t = 5)]
    pub modes: usize,
    /// Keep only antipodally symmetric modes (sphere).
    #[arg(long)]
    pub even: bool,
    #[arg(long, value_enum, default_value_t = PotentialName::Harmonic)]
    pub potential: PotentialName,
    /// Also minimize the κ₁ quotient at this p (OU).
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BranchArgs {
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub p: f64,
    /// Mode the branch bifurcates from; ℓ = 2 is continued among antipodal solutions.
    #[arg(long, default_value_t = 1)]
    pub l: u32,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub direction: f64,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long, default_value_t = 4000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 128)]
    pub nodes: usize,
    /// Dump every profile as CSV `arclength,z,u`.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct KappaArgs {
    #[arg(long, default_value_t = 5)]
    pub d: u32,
    /// Exponents, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 128)]
    pub nodes: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CknMapArgs {
    #[arg(long, default_value_t = 3)]
    pub d: u32,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub a_min: f64,
    #[arg(long, default_value_t = 0.4, allow_hyphen_values = true)]
    pub a_max: f64,
    #[arg(long, default_value_t = 25)]
    pub a_steps: usize,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub b_min: f64,
    #[arg(long, default_value_t = 1.4, allow_hyphen_values = true)]
    pub b_max: f64,
    #[arg(long, default_value_t = 35)]
    pub b_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Functional {
    /// 𝖤, 𝖨 and 𝖦.
    Free,
    /// 𝓕, 𝓘, 𝓠 and the sandwich ε after rescaling to the mass of 𝓑.
    Relative,
    /// Deficit, relative entropy and Fisher distance of the GNS inequality.
    Stability,
    Heisenberg,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub functional: Functional,
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub d: u32,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    pub figure: Figure,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// What a command produced: text for standard output and whole files, written
/// only after the command succeeded.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
}

impl Output {
    /// Routes `text` to `path` when given, else to standard output.
    pub fn to(path: Option<&Path>, text: String) -> Self {
        match path {
            Some(p) => Output { stdout: String::new(), files: vec![(p.to_path_buf(), text)] },
            None => Output { stdout: text, files: Vec::new() },
        }
    }
}

fn scalar(key: &str, v: &Value) -> CliResult<Vec<String>> {
    let flag = format!("--{key}");
    Ok(match v {
        Value::Bool(true) => vec![flag],
        Value::Bool(false) | Value::Null => vec![],
        Value::Number(n) => vec![flag, n.to_string()],
        Value::String(s) => vec![flag, s.clone()],
        Value::Array(items) => {
            let parts: CliResult<Vec<String>> = items
                .iter()
                .map(|x| match x {
                    Value::Number(n) => Ok(n.to_string()),
                    Value::String(s) => Ok(s.clone()),
                    _ => Err(CliError::input(format!("config key {key:?}: array items must be numbers or strings"))),
                })
                .collect();
            vec![flag, parts?.join(",")]
        }
        Value::Object(_) => return Err(CliError::input(format!("config key {key:?}: nested objects are not allowed here"))),
    })
}

/// Flags equivalent to a config file, checked against the subcommand's flags.
pub fn config_args(sub: &str, path: &Path) -> CliResult<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let obj = v.as_object().ok_or_else(|| CliError::input("config must be a JSON object"))?;
    let cmd = Cli::command();
    let subcmd = cmd.find_subcommand(sub).ok_or_else(|| CliError::input(format!("unknown subcommand {sub}")))?;
    let known: Vec<String> = subcmd
        .get_arguments()
        .chain(cmd.get_arguments())
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|l| l != "config" && l != "help" && l != "version")
        .collect();
    let mut out = Vec::new();
    let mut push = |key: &str, val: &Value| -> CliResult<()> {
        let flag = key.replace('_', "-");
        if !known.contains(&flag) {
            return Err(CliError::input(format!("unknown config key {key:?} for {sub}")));
        }
        out.extend(scalar(&flag, val)?);
        Ok(())
    };
    for (k, val) in obj {
        match k.as_str() {
            "command" => {
                if val.as_str() != Some(sub) {
                    return Err(CliError::input(format!("config is for command {val}, not {sub}")));
                }
            }
            "parameters" | "constants_overrides" => {
                let inner = val.as_object().ok_or_else(|| CliError::input(format!("config key {k:?} must be an object")))?;
                for (k2, v2) in inner {
                    push(k2, v2)?;
                }
            }
            "output_path" => push("out", val)?,
            _ => push(k, val)?,
        }
    }
    Ok(out)
}

fn parse(args: &[OsString]) -> CliResult<Result<Cli, String>> {
    match Cli::try_parse_from(args) {
        Ok(c) => Ok(Ok(c)),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp
            | clap::error::ErrorKind::DisplayVersion
            | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => Ok(Err(e.to_string())),
            _ => {
                let text = e.to_string();
                let msg: Vec<&str> = text
                    .lines()
                    .map(str::trim)
                    .take_while(|l| !l.starts_with("Usage:"))
                    .filter(|l| !l.is_empty() && !l.starts_with("tip:"))
                    .collect();
                Err(CliError::Input(msg.join(" ").trim_start_matches("error: ").to_string()))
            }
        },
    }
}

/// The `--config` path and the subcommand name, found before full parsing so
/// that a config file may supply required flags.
fn prescan(args: &[OsString]) -> (Option<PathBuf>, Option<String>) {
    let names: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    let (mut config, mut sub) = (None, None);
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            config = it.next().map(PathBuf::from);
        } else if let Some(rest) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(rest));
        } else if sub.is_none() && names.iter().any(|n| *n == s) {
            sub = Some(s.into_owned());
        }
    }
    (config, sub)
}

/// Parses, applies the config file, runs the command and returns its output;
/// `Ok(Err(text))` carries help or version text. Config values override flags.
pub fn run(args: &[OsString]) -> CliResult<Result<Output, String>> {
    let mut all = args.to_vec();
    if let (Some(path), Some(sub)) = prescan(args) {
        all.extend(config_args(&sub, &path)?.into_iter().map(OsString::from));
    }
    let cli = match parse(&all)? {
        Ok(c) => c,
        Err(text) => return Ok(Err(text)),
    };
    commands::execute(&cli).map(Ok)
}

fn write_files(out: &Output) -> CliResult<()> {
    for (path, text) in &out.files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Entry point of the binary: returns the process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    match run(&args).and_then(|r| {
        if let Ok(out) = &r {
            write_files(out)?;
        }
        Ok(r)
    }) {
        Ok(Ok(out)) => {
            print!("{}", out.stdout);
            0
        }
        Ok(Err(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_line());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &[&str]) -> Vec<OsString> {
        std::iter::once("entroflow").chain(s.iter().copied()).map(OsString::from).collect()
    }

    fn stdout(s: &[&str]) -> String {
        run(&args(s)).unwrap().unwrap().stdout
    }

    fn json_of(s: &[&str]) -> Value {
        serde_json::from_str(&stdout(s)).unwrap()
    }

    #[test]
    fn constants_include_sobolev() {
        let v = json_of(&["constants", "--d", "3"]);
        assert!((v["S_d"].as_f64().unwrap() - 5.4779040895).abs() < 1e-9);
        assert!(v.get("C_GNS").is_none());
    }

    #[test]
    fn sphere_spectrum_starts_at_five_and_twelve() {
        let v = json_of(&["spectrum", "--operator", "sphere", "--d", "5"]);
        let e = v["eigenvalues"].as_array().unwrap();
        assert!((e[0].as_f64().unwrap() - 5.0).abs() < 1e-6);
        assert!((e[1].as_f64().unwrap() - 12.0).abs() < 1e-6);
    }

    #[test]
    fn unknown_flag_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("c.json");
        let code = dispatch(args(&["constants", "--d", "3", "--bogus", "--out", out.to_str().unwrap()]));
        assert_eq!(code, 2);
        assert!(!out.exists());
    }

    #[test]
    fn invalid_parameters_are_input_errors() {
        let e = run(&args(&["spectrum", "--operator", "hp", "--d", "3", "--m", "1.5"])).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let line: Value = serde_json::from_str(&e.to_line()).unwrap();
        assert_eq!(line["error"], "invalid_input");
    }

    #[test]
    fn exhausted_branch_is_a_numerical_failure() {
        let e = run(&args(&["kappa", "--d", "5", "--p", "2.2"])).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn out_flag_writes_file_only() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sub/p.csv");
        let path = out.to_str().unwrap();
        assert_eq!(dispatch(args(&["profile", "--kind", "sobolev", "--nodes", "20", "--out", path])), 0);
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("r,value\n"));
        assert_eq!(text.lines().count(), 21);
    }

    #[test]
    fn config_overrides_flags_and_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        let c = cfg.to_str().unwrap();
        std::fs::write(&cfg, r#"{"command": "constants", "parameters": {"d": 5, "p": 2}}"#).unwrap();
        let v = json_of(&["--config", c, "constants", "--d", "3"]);
        assert_eq!(v["d"], 5);
        assert!(v.get("gamma_p").is_some());
        let v = json_of(&["constants", "--config", c]);
        assert_eq!(v["d"], 5);
        std::fs::write(&cfg, r#"{"parameters": {"dd": 5}}"#).unwrap();
        assert_eq!(run(&args(&["--config", c, "constants"])).unwrap_err().exit_code(), 2);
        std::fs::write(&cfg, r#"{"command": "kappa"}"#).unwrap();
        assert!(run(&args(&["--config", c, "constants", "--d", "3"])).is_err());
        std::fs::write(&cfg, r#"{"output_path": "x.json", "threshold": {"chi": 1}}"#).unwrap();
        assert!(run(&args(&["--config", c, "constants", "--d", "3"])).is_err());
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = stdout(&["--seed", "5", "spectrum", "--operator", "ou", "--p", "1.5", "--mesh", "400"]);
        let b = stdout(&["--seed", "5", "spectrum", "--operator", "ou", "--p", "1.5", "--mesh", "400"]);
        assert_eq!(a, b);
    }

    #[test]
    fn flow_csv_has_the_documented_columns() {
        let text = stdout(&["flow", "--kind", "rfd", "--dt", "1e-2", "--t-end", "0.05", "--nodes", "100"]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,mass,E,F,I_free,I_rel,Q,G,sandwich_eps"));
        assert_eq!(lines.count(), 6);
    }

    #[test]
    fn ckn_map_is_ordered_and_complete() {
        let text = stdout(&["ckn-map", "--a-steps", "3", "--b-steps", "4"]);
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 12);
        assert!(rows[0].starts_with("-2.0000000000000000e0,-2.0000000000000000e0,"));
        assert!(rows[11].starts_with("3.9999999999999991e-1,1.3999999999999999e0,symmetry,"));
    }

    #[test]
    fn help_is_not_an_error() {
        let text = run(&args(&["--help"])).unwrap().unwrap_err();
        assert!(text.contains("ckn-map"));
    }
}
