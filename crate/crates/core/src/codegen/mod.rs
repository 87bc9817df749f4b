//! Backend source emission: CUDA, OpenACC, SYCL and OpenCL.
//!
//! [`generate`] lowers an [`AnnotatedProgram`] and its [`Analyses`] into an
//! [`EmitUnit`]. Every unit is a standalone translation unit: a fixed prelude
//! (CSR struct, edge-list loader, argument helpers, atomics), the generated
//! body (kernels plus the host function), and a small `main` driver that
//! loads a graph, runs the function and prints its outputs.
//!
//! Transfers follow the transfer scopes computed by semantic analysis: each
//! scope copies its `copy_in` set to the device before its first region and
//! its `copy_out` set back after its last region. [`structural_check`]
//! re-reads the emitted text and verifies those contracts.

mod check;
mod gen;
mod prelude;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::frontend::ast::Span;
use crate::semantic::{Analyses, AnnotatedProgram, RegionId};

pub use check::{structural_check, CheckReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendKind {
    Cuda,
    OpenAcc,
    Sycl,
    OpenCl,
}

impl BackendKind {
    pub const ALL: [BackendKind; 4] = [
        BackendKind::Cuda,
        BackendKind::OpenAcc,
        BackendKind::Sycl,
        BackendKind::OpenCl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Cuda => "cuda",
            BackendKind::OpenAcc => "openacc",
            BackendKind::Sycl => "sycl",
            BackendKind::OpenCl => "opencl",
        }
    }

    /// Extension of the host (or only) file.
    pub fn extension(self) -> &'static str {
        match self {
            BackendKind::Cuda => "cu",
            _ => "cpp",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BackendKind::ALL
            .into_iter()
            .find(|b| b.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown backend `{s}` (expected cuda, openacc, sycl or opencl)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodegenConfig {
    /// CUDA threads per block; SYCL and OpenCL global size.
    pub num_threads: usize,
    pub device_var_prefix: String,
    /// Emulate floating-point atomics with compare-exchange loops. Always on
    /// for OpenCL, which has no native float atomics.
    pub float_atomics_emulation: bool,
    pub indent: usize,
    /// Stem for output file names; defaults to the lower-cased function name.
    pub program_name: Option<String>,
}

impl Default for CodegenConfig {
    fn default() -> Self {
        CodegenConfig {
            num_threads: 1024,
            device_var_prefix: "gpu_".to_string(),
            float_atomics_emulation: false,
            indent: 2,
            program_name: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    HostToDevice,
    DeviceToHost,
}

impl Direction {
    pub fn short(self) -> &'static str {
        match self {
            Direction::HostToDevice => "H2D",
            Direction::DeviceToHost => "D2H",
        }
    }
}

/// One emitted transfer statement (or data-clause item for OpenACC).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferSite {
    /// Host-side name of the transferred variable.
    pub symbol: String,
    pub direction: Direction,
    /// Transfer scope from the analysis, if the transfer belongs to one.
    pub scope: Option<usize>,
    pub file: String,
    /// 1-based.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelInfo {
    pub name: String,
    pub region: RegionId,
    pub params: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaunchSite {
    pub kernel: String,
    pub file: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Structure {
    pub device_prefix: String,
    pub kernels: Vec<KernelInfo>,
    pub launches: Vec<LaunchSite>,
    pub transfers: Vec<TransferSite>,
}

/// Generated source for one program and backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitUnit {
    pub backend: BackendKind,
    pub program: String,
    pub files: Vec<(String, String)>,
    pub structure: Structure,
    pub line_counts: BTreeMap<String, usize>,
}

/// First line of the generated body in every file.
pub const BODY_BEGIN: &str = "// ---- generated code ----";
/// First line after the generated body (the driver follows).
pub const BODY_END: &str = "// ---- driver ----";

impl EmitUnit {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }

    /// Non-blank lines of generated body across all files, excluding the
    /// prelude and the driver.
    pub fn body_line_count(&self) -> usize {
        self.files.iter().map(|(_, text)| body_lines(text)).sum()
    }
}

fn body_lines(text: &str) -> usize {
    let mut inside = false;
    let mut count = 0;
    for line in text.lines() {
        let t = line.trim();
        if t == BODY_BEGIN {
            inside = true;
        } else if t == BODY_END {
            inside = false;
        } else if inside && !t.is_empty() {
            count += 1;
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("{backend} backend has no template for {construct}")]
    UnsupportedConstruct {
        backend: BackendKind,
        construct: String,
        span: Span,
    },
    #[error("invalid codegen configuration: {0}")]
    InvalidConfig(String),
}

impl CodegenError {
    pub fn span(&self) -> Option<Span> {
        match self {
            CodegenError::UnsupportedConstruct { span, .. } => Some(*span),
            CodegenError::InvalidConfig(_) => None,
        }
    }
}

/// Emits `program` for `backend`. Pure: equal inputs give byte-identical units.
pub fn generate(
    program: &AnnotatedProgram,
    analyses: &Analyses,
    backend: BackendKind,
    cfg: &CodegenConfig,
) -> Result<EmitUnit, CodegenError> {
    if cfg.num_threads == 0 {
        return Err(CodegenError::InvalidConfig("num_threads must be positive".into()));
    }
    if cfg.indent == 0 || cfg.device_var_prefix.is_empty() {
        return Err(CodegenError::InvalidConfig(
            "indent and device_var_prefix must be non-empty".into(),
        ));
    }
    gen::Gen::new(program, analyses, backend, cfg).run()
}

/// File names a unit for `program_name` and `backend` will contain.
pub fn file_names(program_name: &str, backend: BackendKind) -> Vec<String> {
    let host = format!("{program_name}_{}.{}", backend.name(), backend.extension());
    match backend {
        BackendKind::OpenCl => vec![host, format!("{program_name}_opencl.cl")],
        _ => vec![host],
    }
}
