//! Holds the `acceptance` test target. Run it with
//! `cargo test -p depthgraph-validation --test acceptance`.
