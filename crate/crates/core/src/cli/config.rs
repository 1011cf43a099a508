//! Flat `key = value` run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::init::{gaussian_bump, single_mode};
use crate::io;
use crate::solver::{check_dimension, LambdaChoice, SolverConfig, Variant};

/// How the initial datum is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    GaussianBump,
    SingleMode,
    File,
}

/// Every key of the configuration format, in documentation order.
pub const KEYS: [&str; 18] = [
    "p",
    "d",
    "n",
    "L",
    "T",
    "dt",
    "N_schedule",
    "lambda",
    "picard_tol",
    "max_picard_iters",
    "dealias",
    "variant",
    "u0_kind",
    "u0_scale",
    "u0_path",
    "out_dir",
    "dump_stride",
    "seed",
];

#[derive(Debug, Clone)]
pub struct Settings {
    pub p: f64,
    pub d: usize,
    pub n: usize,
    pub length: f64,
    pub t_final: f64,
    pub dt: f64,
    pub n_schedule: Vec<f64>,
    pub lambda: LambdaChoice,
    pub picard_tol: f64,
    pub max_picard_iters: usize,
    pub dealias: bool,
    pub variant: Variant,
    pub u0_kind: InitialKind,
    /// `|u0|_{2p}` for the generated initial data.
    pub u0_scale: f64,
    pub u0_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Field dumps every this many steps; 0 disables dumps.
    pub dump_stride: usize,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            p: 1.0,
            d: 1,
            n: 128,
            length: 50.0,
            t_final: 0.25,
            dt: 1e-3,
            n_schedule: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            lambda: LambdaChoice::Auto,
            picard_tol: 1e-10,
            max_picard_iters: 200,
            dealias: true,
            variant: Variant::Full,
            u0_kind: InitialKind::GaussianBump,
            u0_scale: 1.0,
            u0_path: None,
            out_dir: PathBuf::from("out"),
            dump_stride: 50,
            seed: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, what: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::validation(format!("`{key}` expects {what}, got `{value}`")))
}

impl Settings {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "p" => self.p = parse_num(key, v, "a number")?,
            "d" => self.d = parse_num(key, v, "a positive integer")?,
            "n" => self.n = parse_num(key, v, "a positive integer")?,
            "L" => self.length = parse_num(key, v, "a number")?,
            "T" => self.t_final = parse_num(key, v, "a number")?,
            "dt" => self.dt = parse_num(key, v, "a number")?,
            "N_schedule" => {
                self.n_schedule = v
                    .split(',')
                    .map(|s| parse_num(key, s.trim(), "a comma-separated list of numbers"))
                    .collect::<Result<_>>()?
            }
            "lambda" => {
                self.lambda = if v == "auto" {
                    LambdaChoice::Auto
                } else {
                    LambdaChoice::Fixed(parse_num(key, v, "`auto` or a number")?)
                }
            }
            "picard_tol" => self.picard_tol = parse_num(key, v, "a number")?,
            "max_picard_iters" => self.max_picard_iters = parse_num(key, v, "a positive integer")?,
            "dealias" => {
                self.dealias = match v {
                    "true" | "on" | "1" => true,
                    "false" | "off" | "0" => false,
                    _ => return Err(Error::validation(format!("`dealias` expects true or false, got `{v}`"))),
                }
            }
            "variant" => {
                self.variant = match v {
                    "full" => Variant::Full,
                    "no_linear_term" => Variant::NoLinearTerm,
                    _ => {
                        return Err(Error::validation(format!(
                            "`variant` expects full or no_linear_term, got `{v}`"
                        )))
                    }
                }
            }
            "u0_kind" => {
                self.u0_kind = match v {
                    "gaussian_bump" => InitialKind::GaussianBump,
                    "single_mode" => InitialKind::SingleMode,
                    "file" => InitialKind::File,
                    _ => {
                        return Err(Error::validation(format!(
                            "`u0_kind` expects gaussian_bump, single_mode or file, got `{v}`"
                        )))
                    }
                }
            }
            "u0_scale" => self.u0_scale = parse_num(key, v, "a number")?,
            "u0_path" => self.u0_path = Some(PathBuf::from(v)),
            "out_dir" => self.out_dir = PathBuf::from(v),
            "dump_stride" => self.dump_stride = parse_num(key, v, "a nonnegative integer")?,
            "seed" => self.seed = parse_num(key, v, "a nonnegative integer")?,
            other => {
                return Err(Error::validation(format!(
                    "unknown key `{other}`; valid keys are {}",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses file contents: one assignment per line, `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::validation(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::validation(format!("line {}: {}", lineno + 1, strip(e))))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.d, self.n, self.length)
    }

    /// The validated solver configuration.
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.p, self.grid()?, self.t_final, self.dt)?;
        cfg.n_schedule = self.n_schedule.clone();
        cfg.lambda = self.lambda;
        cfg.picard_tol = self.picard_tol;
        cfg.max_picard_iters = self.max_picard_iters;
        cfg.dealias = self.dealias;
        cfg.variant = self.variant;
        cfg.seed = self.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The initial datum described by `u0_kind`.
    pub fn initial_data(&self) -> Result<Field> {
        let grid = self.grid()?;
        match self.u0_kind {
            InitialKind::GaussianBump => gaussian_bump(&grid, self.u0_scale, self.p),
            InitialKind::SingleMode => single_mode(&grid, self.u0_scale, self.p),
            InitialKind::File => {
                let path = self
                    .u0_path
                    .as_ref()
                    .ok_or_else(|| Error::validation("u0_kind = file needs u0_path"))?;
                let (field, _) = io::load(path)?;
                if *field.grid() != grid {
                    return Err(Error::GridMismatch(format!(
                        "{} holds a d = {}, n = {}, L = {} field but the run uses d = {}, n = {}, L = {}",
                        path.display(),
                        field.grid().dim(),
                        field.grid().n(),
                        field.grid().length(),
                        grid.dim(),
                        grid.n(),
                        grid.length()
                    )));
                }
                Ok(field)
            }
        }
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Validation(m) => m,
        other => other.to_string(),
    }
}

/// Reads `path` (when given), then applies `overrides` of the form
/// `key=value`, which take precedence. The dimension constraint `d < 6p`
/// is enforced here.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = path {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        s.apply_text(&text)?;
    }
    for o in overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| Error::validation(format!("override `{o}` is not of the form key=value")))?;
        s.set(key, value)?;
    }
    check_dimension(s.p, s.d)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let mut s = Settings::default();
        s.apply_text("p=1\nd=1\nn=128\nL=50\nT=0.25\ndt=1e-3").unwrap();
        let cfg = s.solver_config().unwrap();
        assert_eq!(cfg.n_schedule, vec![2.0, 4.0, 8.0, 16.0, 32.0]);
        assert_eq!(cfg.lambda, LambdaChoice::Auto);
        assert_eq!(cfg.picard_tol, 1e-10);
        assert!(cfg.dealias);
        assert_eq!(s.dump_stride, 50);
    }

    #[test]
    fn comments_and_lists() {
        let mut s = Settings::default();
        s.apply_text("# header\nN_schedule = 1, 2.5 ,4 # radii\nlambda = 12\n\nvariant = no_linear_term\n")
            .unwrap();
        assert_eq!(s.n_schedule, vec![1.0, 2.5, 4.0]);
        assert_eq!(s.lambda, LambdaChoice::Fixed(12.0));
        assert_eq!(s.variant, Variant::NoLinearTerm);
    }

    #[test]
    fn rejections() {
        let mut s = Settings::default();
        let e = s.apply_text("q = 3").unwrap_err().to_string();
        assert!(e.contains("unknown key `q`"), "{e}");
        assert!(s.apply_text("n = 12.5").unwrap_err().to_string().contains("line 1"));
        assert!(s.apply_text("dealias = maybe").is_err());
        assert!(s.apply_text("just words").is_err());
        let e = parse_config(None, &["d=6".into(), "p=1".into()]).unwrap_err();
        assert!(e.is_validation() && e.to_string().contains("d < 6p"), "{e}");
    }

    #[test]
    fn overrides_win() {
        let s = parse_config(None, &["dt=5e-4".into()]).unwrap();
        assert_eq!(s.dt, 5e-4);
        assert!(parse_config(None, &["dt".into()]).is_err());
    }
}
