#![allow(dead_code)]

use std::io::Write;
use std::process::{Command, Output, Stdio};

pub fn liouville(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_liouville"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn liouville");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

pub const INVOLUTION: &str = "[[0,1],[1,0]]";
/// 8π, so ρ = (8π, 8π) lies on Γ_1 for the involution matrix.
pub const EIGHT_PI: &str = "25.132741228718345";
