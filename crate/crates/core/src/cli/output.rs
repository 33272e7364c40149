use std::io::Write;
use std::path::{Path, PathBuf};

use super::jobs::Job;
use super::kv::{format_kv, parse_kv};
use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Record of one run: enough to reproduce its output byte for byte.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub out: PathBuf,
    pub params: Vec<(String, String)>,
}

impl RunManifest {
    pub fn for_job(job: &Job) -> Self {
        RunManifest {
            command: job.command().to_string(),
            version: VERSION.to_string(),
            out: job.out().to_path_buf(),
            params: job.params(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut pairs = vec![
            ("command".to_string(), self.command.clone()),
            ("version".to_string(), self.version.clone()),
            ("out".to_string(), self.out.display().to_string()),
        ];
        pairs.extend(self.params.iter().cloned());
        format!("# aquannr run manifest\n{}", format_kv(&pairs))
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut command = None;
        let mut version = None;
        let mut out = None;
        let mut params = Vec::new();
        for (k, v) in parse_kv(text, path)? {
            match k.as_str() {
                "command" => command = Some(v),
                "version" => version = Some(v),
                "out" => out = Some(PathBuf::from(v)),
                _ => params.push((k, v)),
            }
        }
        let missing = |key: &str| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("manifest lacks '{key}'"),
        };
        Ok(RunManifest {
            command: command.ok_or_else(|| missing("command"))?,
            version: version.ok_or_else(|| missing("version"))?,
            out: out.ok_or_else(|| missing("out"))?,
            params,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn job(&self) -> Result<Job> {
        Job::from_params(&self.command, self.out.clone(), self.params.clone())
    }
}

/// Default manifest location: the output path with `.manifest` appended.
pub fn default_manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

fn write_one(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Writes every file through a temporary sibling and a rename. If any write
/// fails, the files already written by this call are removed.
pub fn write_all_or_nothing(files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    for (i, (path, bytes)) in files.iter().enumerate() {
        if let Err(e) = write_one(path, bytes) {
            for (done, _) in &files[..i] {
                let _ = std::fs::remove_file(done);
            }
            return Err(e);
        }
    }
    Ok(())
}

/// Runs `job` and writes its output together with its manifest.
pub fn execute(job: &Job, manifest: &Path) -> Result<()> {
    let bytes = job.produce()?;
    let text = RunManifest::for_job(job).to_text();
    write_all_or_nothing(&[
        (job.out().to_path_buf(), bytes),
        (manifest.to_path_buf(), text.into_bytes()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_text_round_trips() {
        let m = RunManifest {
            command: "simulate".into(),
            version: VERSION.into(),
            out: "out/m.csv".into(),
            params: vec![("seeds".into(), "0,1".into()), ("duration_s".into(), "100".into())],
        };
        let text = m.to_text();
        assert!(text.starts_with("# aquannr run manifest\ncommand = simulate\n"));
        assert_eq!(RunManifest::parse(&text, Path::new("m")).unwrap(), m);
        assert!(RunManifest::parse("command = x\n", Path::new("m")).is_err());
    }

    #[test]
    fn default_manifest_sits_next_to_the_output() {
        assert_eq!(
            default_manifest_path(Path::new("dir/metrics.csv")),
            PathBuf::from("dir/metrics.csv.manifest")
        );
    }

    #[test]
    fn failed_batch_leaves_nothing_behind() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("a.csv");
        let bad = dir.path().join("missing-dir").join("b.csv");
        let r = write_all_or_nothing(&[(good.clone(), b"x".to_vec()), (bad, b"y".to_vec())]);
        assert!(r.is_err());
        assert!(!good.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
