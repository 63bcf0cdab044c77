//! Adapter for detectors living in external executables.
//!
//! The child reads `n_v n_e` followed by one `source\ttarget\tweight` line
//! per edge (presentation order) on stdin, finds the seed in
//! `SOLSPACE_SEED`, and prints one `label\tcommunity_id` line per node.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use wait_timeout::ChildExt;

use super::Membership;
use crate::error::{Error, Result};
use crate::graph::{Graph, Seed};

pub const SEED_ENV: &str = "SOLSPACE_SEED";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

const STDERR_EXCERPT: usize = 512;

fn excerpt(stderr: &str) -> String {
    let s = stderr.trim();
    if s.len() <= STDERR_EXCERPT {
        return s.to_string();
    }
    let mut end = STDERR_EXCERPT;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}...", &s[..end])
}

fn request(g: &Graph) -> String {
    let mut input = format!("{} {}\n", g.node_count(), g.edge_count());
    for e in g.edges() {
        input.push_str(&format!(
            "{}\t{}\t{}\n",
            g.label(e.source),
            g.label(e.target),
            e.weight
        ));
    }
    input
}

/// Maps the child's `label\tcommunity_id` lines back onto node indices.
pub(crate) fn parse_response(g: &Graph, stdout: &str) -> Result<Membership> {
    let mut assignment: Vec<Option<usize>> = vec![None; g.node_count()];
    for (i, line) in stdout.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(label), Some(id), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Detector(format!(
                "protocol violation at output line {}: {line:?}",
                i + 1
            )));
        };
        let id: usize = id.trim().parse().map_err(|_| {
            Error::Detector(format!("invalid community id {:?} for label {label:?}", id))
        })?;
        let v = g
            .node_index(label)
            .ok_or_else(|| Error::Detector(format!("unknown label {label:?}")))?;
        if assignment[v].replace(id).is_some() {
            return Err(Error::Detector(format!("duplicate label {label:?}")));
        }
    }
    assignment
        .into_iter()
        .enumerate()
        .map(|(v, a)| {
            a.ok_or_else(|| {
                Error::Detector(format!("missing assignment for label {:?}", g.label(v)))
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(Membership)
}

pub fn external_detect(
    g: &Graph,
    command: &[String],
    seed: Seed,
    timeout: Duration,
) -> Result<Membership> {
    let (program, args) = command
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty external command".into()))?;
    let mut child = Command::new(program)
        .args(args)
        .env(SEED_ENV, seed.0.to_string())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Detector(format!("cannot start {program:?}: {e}")))?;

    let input = request(g);
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = thread::spawn(move || {
        // a child that exits without reading closes the pipe; that is
        // reported through its exit status instead
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut buf = String::new();
        stdout.read_to_string(&mut buf).map(|_| buf)
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let status = match child.wait_timeout(timeout)? {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::Detector(format!(
                "{program:?} timed out after {} s",
                timeout.as_secs_f64()
            )));
        }
    };
    let _ = writer.join();
    let out = reader
        .join()
        .map_err(|_| Error::Detector("stdout reader panicked".into()))??;
    let err = err_reader.join().unwrap_or_default();
    if !status.success() {
        return Err(Error::Detector(format!(
            "{program:?} exited with {status}: {}",
            excerpt(&err)
        )));
    }
    parse_response(g, &out)
}
