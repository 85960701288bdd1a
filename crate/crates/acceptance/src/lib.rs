//! Acceptance checks for `infogain`. Run with
//! `cargo test -p infogain-acceptance --test acceptance`; each criterion
//! prints one `PASS` or `FAIL` line.
