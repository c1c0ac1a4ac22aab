use std::fmt::{Display, Write as _};
use std::fs;
use std::path::Path;

use clap::ValueEnum;

use crate::error::{CliError, CliResult};

/// Units of information quantities in written tables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn scale(self, nats: f64) -> f64 {
        match self {
            Self::Nats => nats,
            Self::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Nats => "nats",
            Self::Bits => "bits",
        }
    }
}

/// A real with 15 significant digits, positional unless the magnitude is
/// far from 1.
pub fn number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        return format!("{x:.14e}");
    }
    format!("{:.*}", (14 - exp) as usize, x)
}

/// Parameters that reproduce a run; written as the `#` header of every
/// output file.
#[derive(Clone, Debug)]
pub struct Manifest {
    command: String,
    params: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            params: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Display) -> Self {
        self.params.push((key.into(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "# tool: bicluster {}\n# command: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.command
        );
        for (k, v) in &self.params {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s
    }
}

/// An output file: manifest header, then comment and data lines.
#[derive(Clone, Debug)]
pub struct Document {
    text: String,
}

impl Document {
    pub fn new(manifest: &Manifest) -> Self {
        Self {
            text: manifest.render(),
        }
    }

    pub fn comment(&mut self, line: impl Display) {
        let _ = writeln!(self.text, "# {line}");
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(" "));
        self.text.push('\n');
    }

    pub fn reals(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| number(v)).collect();
        self.row(&cells);
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(path, &self.text).map_err(|e| CliError::io(path, e))
    }
}
