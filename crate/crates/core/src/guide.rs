//! The project guide, one module per chapter of the mdbook under `book/`.
//!
//! Each chapter file is included verbatim as module documentation, so every
//! code block in the book compiles and runs as a doc-test and cannot drift
//! from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/gaussian-states.md")]
pub mod gaussian_states {}

#[doc = include_str!("../../../book/src/four-mode-amplifier.md")]
pub mod four_mode_amplifier {}

#[doc = include_str!("../../../book/src/detection.md")]
pub mod detection_model {}

#[doc = include_str!("../../../book/src/cycles-and-estimators.md")]
pub mod cycles_and_estimators {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod command_line {}
