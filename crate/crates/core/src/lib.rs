//! A compiler and reference interpreter for a vertex-centric graph DSL.
//!
//! Pipeline: [`frontend`] parses `.sp` source, [`semantic`] type-checks it and
//! computes host/device transfer sets, [`interpreter`] executes it on a
//! [`csr::CsrGraph`], and [`codegen`] emits CUDA, OpenACC, SYCL or OpenCL
//! source. [`oracles`] holds textbook reference algorithms and [`corpus`] the
//! bundled programs.

pub mod codegen;
pub mod corpus;
pub mod csr;
pub mod frontend;
pub mod interpreter;
pub mod oracles;
pub mod semantic;

use thiserror::Error;

/// Any error the pipeline can report for a user input.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Frontend(#[from] frontend::FrontendError),
    #[error(transparent)]
    Type(#[from] semantic::TypeError),
    #[error(transparent)]
    Runtime(#[from] interpreter::RuntimeError),
    #[error(transparent)]
    Graph(#[from] csr::CsrError),
    #[error(transparent)]
    Codegen(#[from] codegen::CodegenError),
}

impl Error {
    /// Source location, for errors that have one.
    pub fn span(&self) -> Option<frontend::Span> {
        match self {
            Error::Frontend(e) => Some(e.span()),
            Error::Type(e) => Some(e.span),
            Error::Runtime(e) => e.span(),
            Error::Graph(_) => None,
            Error::Codegen(e) => e.span(),
        }
    }
}
