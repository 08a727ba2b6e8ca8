// Shared by several test binaries; not every binary uses every helper.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};
use std::{env, fs, process};

/// Self-cleaning unique directory under the system temp dir.
pub struct TempDir(PathBuf);

impl TempDir {
    pub fn new(tag: &str) -> TempDir {
        static COUNTER: AtomicU32 = AtomicU32::new(0);
        let n = COUNTER.fetch_add(1, Ordering::Relaxed);
        let path = env::temp_dir().join(format!("mopo-test-{}-{tag}-{n}", process::id()));
        fs::create_dir_all(&path).unwrap();
        TempDir(path)
    }

    pub fn path(&self) -> &Path {
        &self.0
    }

    pub fn join(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

/// Runs the built binary with the given arguments and extra environment.
pub fn mopo_with_env(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mopo"));
    // Keep runs independent of the ambient environment.
    cmd.env_remove("MOPO_OUT_DIR");
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

pub fn mopo(args: &[&str]) -> Output {
    mopo_with_env(args, &[])
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

pub fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A fast balanced three-point sweep used across the CLI tests.
pub const SMALL_CONFIG: &str = r#"
[run]
seed = 11
n_cycles = 300
samples_per_cycle = 32
dt_us = 25.0

[model]
kind = "bloch_messiah"
lambda1 = 1.0
lambda2 = 0.0
t1 = 0.7071067811865476
t2 = 0.7071067811865476

[sweep]
tau = 1.0
kappa = 0.75
intensities = [0.2, 0.6, 1.0]
"#;

pub fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}
