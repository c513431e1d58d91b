use std::io::Read;
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use mrweb_core::html::GeometryDump;
use mrweb_core::raster::RasterImage;

use crate::error::{Error, Result};

/// An external command that turns an HTML file into a screenshot and a
/// geometry dump. `{html}`, `{png}` and `{geometry}` in the template are
/// replaced with shell-quoted paths and the result runs under `sh -c`.
#[derive(Debug, Clone)]
pub struct Renderer {
    pub command: String,
    pub timeout: Duration,
    pub working_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub png: PathBuf,
    pub geometry: PathBuf,
    pub image: RasterImage,
    pub dump: GeometryDump,
    pub output: String,
}

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

impl Renderer {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            timeout: Duration::from_secs(60),
            working_dir: None,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn in_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.working_dir = Some(dir.into());
        self
    }

    pub fn command_line(&self, html: &Path, png: &Path, geometry: &Path) -> String {
        self.command
            .replace("{html}", &shell_quote(html))
            .replace("{png}", &shell_quote(png))
            .replace("{geometry}", &shell_quote(geometry))
    }

    pub fn render(&self, html: &Path, png: &Path, geometry: &Path) -> Result<RenderOutput> {
        for stale in [png, geometry] {
            if stale.exists() {
                std::fs::remove_file(stale)?;
            }
        }
        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(self.command_line(html, png, geometry))
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .process_group(0);
        if let Some(dir) = &self.working_dir {
            cmd.current_dir(dir);
        }
        let mut child = cmd.spawn()?;
        let readers = [
            drain(child.stdout.take().unwrap()),
            drain(child.stderr.take().unwrap()),
        ];
        let deadline = Instant::now() + self.timeout;
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break Some(status);
            }
            if Instant::now() >= deadline {
                // The whole group, so grandchildren release the pipes too.
                unsafe {
                    libc::killpg(child.id() as libc::pid_t, libc::SIGKILL);
                }
                child.wait()?;
                break None;
            }
            std::thread::sleep(Duration::from_millis(10));
        };
        let output: String = readers.map(|r| r.join().unwrap_or_default()).concat();
        let fail = |message: String| Error::Render {
            message,
            output: output.clone(),
        };
        match status {
            None => return Err(fail(format!("timed out after {:?}", self.timeout))),
            Some(s) if !s.success() => return Err(fail(format!("exited with {s}"))),
            Some(_) => {}
        }
        for (path, artifact) in [(png, "screenshot"), (geometry, "geometry")] {
            if !path.is_file() {
                return Err(Error::RenderMissing {
                    artifact,
                    output: output.clone(),
                });
            }
        }
        let image = RasterImage::open(png).map_err(|e| fail(format!("unreadable screenshot: {e}")))?;
        let dump = std::fs::read_to_string(geometry)
            .map_err(Error::from)
            .and_then(|t| Ok(GeometryDump::from_json(&t)?))
            .and_then(|d| d.validate().map(|_| d).map_err(Error::from))
            .map_err(|e| fail(format!("unreadable geometry: {e}")))?;
        Ok(RenderOutput {
            png: png.to_path_buf(),
            geometry: geometry.to_path_buf(),
            image,
            dump,
            output,
        })
    }
}

fn drain(mut pipe: impl Read + Send + 'static) -> std::thread::JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = pipe.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}
