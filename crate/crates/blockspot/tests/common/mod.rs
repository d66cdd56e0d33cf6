#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_blockspot");

pub fn blockspot(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(cwd)
        .env("BLOCKSPOT_THREADS", "1")
        .output()
        .expect("binary runs")
}

pub fn ok(args: &[&str], cwd: &Path) -> String {
    let out = blockspot(args, cwd);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}\nstderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn code(args: &[&str], cwd: &Path) -> i32 {
    blockspot(args, cwd).status.code().expect("exit code")
}
