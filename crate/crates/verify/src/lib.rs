//! Holds the acceptance suite (`cargo test -p ruinwalk-verify`); no library code.
