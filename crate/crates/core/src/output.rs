//! CSV, binary and manifest writers. Every file is written atomically.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Version written in the first comment line of every CSV file.
pub const FORMAT_VERSION: u32 = 1;

/// Locale-independent decimal; exponent form outside `[1e-4, 1e15)`, `nan` for NaN.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == 0.0 || (v.abs() >= 1e-4 && v.abs() < 1e15) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Writes `bytes` to a temporary sibling, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "no file name"))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// In-memory CSV table: comment lines, a header row and data rows.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_string()).collect(), ..Self::default() }
    }

    /// Adds a `# key: value` line below the version line.
    pub fn comment(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.comments.push(format!("{key}: {value}"));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, format_version: u32) -> String {
        let mut out = format!("# gcm-peres format {format_version}\n");
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub compute_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    pub command: String,
    pub version: String,
    pub format_version: u32,
    pub config: serde_json::Value,
    pub files: Vec<FileEntry>,
    pub timings: Timings,
}

impl ResultManifest {
    pub fn file_name(command: &str) -> String {
        format!("manifest-{command}.json")
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// Names of listed files whose current checksum differs (or that are missing).
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| fs::read(dir.join(&f.name)).map(|b| sha256_hex(&b) != f.sha256).unwrap_or(true))
            .map(|f| f.name.clone())
            .collect()
    }
}

/// Collects the files of one command and their checksums.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    format_version: u32,
    files: Vec<FileEntry>,
}

impl OutputSet {
    pub fn create(dir: &Path, format_version: u32) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), format_version, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry { name: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(path)
    }

    pub fn write_csv(&mut self, name: &str, table: &CsvTable) -> io::Result<PathBuf> {
        let text = table.render(self.format_version);
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes `manifest-<command>.json`; it is not listed in itself.
    pub fn finish<C: Serialize>(self, command: &str, config: &C, timings: Timings) -> io::Result<ResultManifest> {
        let manifest = ResultManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            format_version: self.format_version,
            config: serde_json::to_value(config).map_err(io::Error::other)?,
            files: self.files,
            timings,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        write_atomic(&self.dir.join(ResultManifest::file_name(command)), text.as_bytes())?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.0, -0.25, 1.0 / 3.0, 1e-20, 6.02e23, -1234.5678] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_f64(2.5), "2.5");
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.comment("level", 3);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.render(1), "# gcm-peres format 1\n# level: 3\na,b\n1,2\n");
    }

    #[test]
    fn manifest_lists_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::create(dir.path(), 1).unwrap();
        out.write_bytes("x.bin", b"abc").unwrap();
        let m = out.finish("test", &serde_json::json!({"k": 1}), Timings { compute_seconds: 0.0, total_seconds: 0.0 }).unwrap();
        assert_eq!(m.files.len(), 1);
        assert!(m.verify(dir.path()).is_empty());
        let read = ResultManifest::read(&dir.path().join("manifest-test.json")).unwrap();
        assert_eq!(read, m);
        fs::write(dir.path().join("x.bin"), b"abd").unwrap();
        assert_eq!(m.verify(dir.path()), vec!["x.bin".to_string()]);
    }
}
