//! Library surface of the `voatrace` command-line tool: the state-expression
//! parser, lattice and harmonic file formats, output rendering, and the
//! verification suites.

pub mod expr;
pub mod output;
pub mod run;
pub mod spec_io;
pub mod suites;
