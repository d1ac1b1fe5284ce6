//! Spec-driven generation of Model–View–Presenter plugins for command-line
//! executables.
//!
//! The pipeline is layout file + flag catalogs → [`spec::GuiSpec`] →
//! per-backend generated trees. The [`presenter`] module holds the
//! backend-neutral run logic shared by every generated plugin, and
//! [`bridge`] the viewer communication layer.

pub mod bridge;
pub mod builder;
pub mod codegen;
pub mod flags;
pub mod harness;
pub mod layout;
pub mod presenter;
pub mod spec;

pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");
