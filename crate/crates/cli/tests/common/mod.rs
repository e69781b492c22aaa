#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};

pub const RAW_HEADER: &str = "timestamp,processId,threadId,parentProcessId,userId,mountNamespace,processName,hostName,eventId,eventName,stackAddresses,argsNum,returnValue,args,sus,evil";

/// Event-log rows in the raw honeypot layout. Every fifth row is suspicious.
pub fn raw_events(n: usize, seed: u64) -> String {
    let mut r = rand::rngs::StdRng::seed_from_u64(seed);
    let procs = ["close", "sshd", "systemd", "ps", "bash"];
    let mut out = format!("{RAW_HEADER}\n");
    for i in 0..n {
        let sus = u8::from(i % 5 == 0);
        let pid: u32 = r.random_range(1..2000) + 3000 * u32::from(sus);
        let user = if r.random_bool(0.7) {
            0
        } else {
            1000 + r.random_range(0..3)
        };
        let mnt = if r.random_bool(0.8) {
            4026531840u64
        } else {
            4026532231
        };
        let proc_name = procs[r.random_range(0..procs.len())];
        let (event, args) = match r.random_range(0..3) {
            0 => (3, format!("[{{'name': 'fd', 'type': 'int', 'value': {}}}]", r.random_range(0..40))),
            1 => (
                257,
                format!(
                    "[{{'name': 'dirfd', 'type': 'int', 'value': -100}}, {{'name': 'pathname', 'type': 'const char*', 'value': '/etc/f{}'}}]",
                    r.random_range(0..6)
                ),
            ),
            _ => (1005, "[]".to_string()),
        };
        let n_args = args.matches("'name'").count();
        let ret: i64 = if r.random_bool(0.9) {
            0
        } else {
            -r.random_range(1..20)
        };
        out.push_str(&format!(
            "{}.{},{pid},{},{},{user},{mnt},{proc_name},ip-{},{event},evt,[],{n_args},{ret},\"{args}\",{sus},{}\n",
            i / 10,
            i % 10,
            pid + r.random_range(0..3),
            r.random_range(1..100),
            i % 3,
            u8::from(sus == 1 && i % 10 == 0),
        ));
    }
    out
}

/// Runs the `qae` binary in `dir`.
pub fn qae(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qae"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("qae binary runs")
}

pub fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Config for the 8-feature synthetic benchmark.
pub fn benchmark_toml(seed: u64) -> String {
    format!(
        r#"version = 1
seed = {seed}
output_dir = "out"

[data]
train = "data/train.csv"
test = "data/test.csv"

[synth]
marginal = "log_normal"
correlation = 0.8
displacement = 2.0
"#
    )
}
