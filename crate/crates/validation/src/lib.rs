//! Acceptance checks for `invbq`, run with
//! `cargo test -p invbq-validation --test acceptance`.
