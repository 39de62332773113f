//! Holds the acceptance target (`tests/acceptance.rs`); run it with
//! `cargo test -p dunkl-validation --test acceptance`.
