//! Test-only package. The acceptance criteria live in `tests/acceptance.rs`
//! and share their signal oracles with the core property suites.
