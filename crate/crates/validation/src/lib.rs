//! Acceptance checks for `fracvem`; see `tests/acceptance.rs`.
