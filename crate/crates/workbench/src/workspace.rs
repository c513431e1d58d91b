use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use mrweb_core::eval::PageInputs;
use mrweb_core::iqa::{load_ratings, RatingRecord};
use mrweb_core::raster::{EmbeddingVector, RasterImage};
use mrweb_core::resource::ResourceList;
use mrweb_gen::{PromptStrategy, Renderer};

use crate::config::{Config, CONFIG_FILE};
use crate::error::{Error, Result};

/// Page ids double as directory names: ASCII letters, digits, `_` and `-`,
/// not starting with a separator, at most 64 bytes.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
        && id.as_bytes()[0].is_ascii_alphanumeric()
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes a file by filling a sibling temp file and renaming it over the
/// target, so readers see either the old or the new contents in full.
pub fn atomic_write_with(path: &Path, fill: impl FnOnce(&mut File) -> io::Result<()>) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| io::Error::other("path has no file name"))?;
    let temp = dir.join(format!(
        ".{}.{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        let mut file = File::create(&temp)?;
        fill(&mut file)?;
        file.sync_all()?;
        std::fs::rename(&temp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&temp);
    }
    result
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    atomic_write_with(path, |f| f.write_all(bytes))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::Missing(path.to_path_buf()),
        _ => Error::from(e).in_file(path),
    })
}

fn read_resources(path: &Path) -> Result<ResourceList> {
    ResourceList::from_json(&read_text(path)?).map_err(|e| Error::from(e).in_file(path))
}

fn read_image(path: &Path) -> Result<RasterImage> {
    if !path.is_file() {
        return Err(Error::Missing(path.to_path_buf()));
    }
    RasterImage::open(path).map_err(|e| Error::from(e).in_file(path))
}

fn read_embedding(path: &Path) -> Result<Option<EmbeddingVector>> {
    if !path.is_file() {
        return Ok(None);
    }
    EmbeddingVector::open(path).map(Some).map_err(|e| Error::from(e).in_file(path))
}

/// A workspace root:
///
/// ```text
/// mrweb.json
/// pages/<id>/{original.html, original.png, resources.json, geometry.json, embedding.json?}
/// generated/<id>/<strategy>/{page.html, page.png, resources.json, geometry.json, transcript.json, embedding.json?}
/// reports/<id>/<strategy>.json
/// ratings/ratings.json
/// ```
#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
    pub config: Config,
}

impl Workspace {
    /// Opens `root`, reading `mrweb.json` when present.
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        if !root.is_dir() {
            return Err(Error::Missing(root.to_path_buf()));
        }
        let root = root.canonicalize()?;
        let config_path = root.join(CONFIG_FILE);
        let config = if config_path.is_file() {
            Config::load(&config_path)?
        } else {
            Config::default()
        };
        Ok(Self { root, config })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn page_ids(&self) -> Result<Vec<String>> {
        let dir = self.root.join("pages");
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let mut ids = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if entry.file_type()?.is_dir() && is_valid_id(&name) {
                ids.push(name);
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn page_dir(&self, id: &str) -> Result<PathBuf> {
        if !is_valid_id(id) {
            return Err(Error::InvalidId(id.to_string()));
        }
        let dir = self.root.join("pages").join(id);
        if !dir.is_dir() {
            return Err(Error::UnknownPage(id.to_string()));
        }
        Ok(dir)
    }

    pub fn generated_dir(&self, id: &str, strategy: PromptStrategy) -> Result<PathBuf> {
        self.page_dir(id)?;
        Ok(self.root.join("generated").join(id).join(strategy.as_str()))
    }

    /// Strategies with a generated screenshot for page `id`, in canonical order.
    pub fn strategies(&self, id: &str) -> Result<Vec<PromptStrategy>> {
        let mut out = Vec::new();
        for s in PromptStrategy::ALL {
            if self.generated_dir(id, s)?.join("page.png").is_file() {
                out.push(s);
            }
        }
        Ok(out)
    }

    pub fn report_path(&self, id: &str, strategy: PromptStrategy) -> PathBuf {
        self.root.join("reports").join(id).join(format!("{strategy}.json"))
    }

    pub fn ratings_path(&self) -> PathBuf {
        self.root.join("ratings").join("ratings.json")
    }

    pub fn resources_path(&self, id: &str) -> Result<PathBuf> {
        Ok(self.page_dir(id)?.join("resources.json"))
    }

    pub fn reference_image_path(&self, id: &str) -> Result<PathBuf> {
        Ok(self.page_dir(id)?.join("original.png"))
    }

    pub fn reference_resources(&self, id: &str) -> Result<ResourceList> {
        read_resources(&self.resources_path(id)?)
    }

    pub fn reference_inputs(&self, id: &str) -> Result<PageInputs> {
        let dir = self.page_dir(id)?;
        Ok(PageInputs {
            image: read_image(&dir.join("original.png"))?,
            resources: read_resources(&dir.join("resources.json"))?,
            embedding: read_embedding(&dir.join("embedding.json"))?,
        })
    }

    pub fn generated_inputs(&self, id: &str, strategy: PromptStrategy) -> Result<PageInputs> {
        let dir = self.generated_dir(id, strategy)?;
        if !dir.join("page.png").is_file() {
            return Err(Error::UnknownGenerated {
                page: id.to_string(),
                strategy: strategy.to_string(),
            });
        }
        Ok(PageInputs {
            image: read_image(&dir.join("page.png"))?,
            resources: read_resources(&dir.join("resources.json"))?,
            embedding: read_embedding(&dir.join("embedding.json"))?,
        })
    }

    pub fn renderer(&self) -> Result<Renderer> {
        let command = self
            .config
            .renderer_command
            .clone()
            .ok_or_else(|| Error::Invalid("renderer_command is not set in mrweb.json".into()))?;
        Ok(Renderer::new(command)
            .with_timeout(std::time::Duration::from_secs(self.config.renderer_timeout_secs))
            .in_dir(&self.root))
    }

    /// Every (page, strategy) with a generated screenshot, as `page/strategy` ids.
    pub fn rating_pairs(&self) -> Result<Vec<String>> {
        let mut pairs = Vec::new();
        for id in self.page_ids()? {
            for s in self.strategies(&id)? {
                pairs.push(pair_id(&id, s));
            }
        }
        Ok(pairs)
    }

    pub fn load_ratings(&self) -> Result<Vec<RatingRecord>> {
        let path = self.ratings_path();
        if !path.is_file() {
            return Ok(Vec::new());
        }
        load_ratings(&read_text(&path)?).map_err(|e| Error::from(e).in_file(&path))
    }

    /// Generated outputs whose page does not exist.
    pub fn orphans(&self) -> Result<Vec<PathBuf>> {
        let dir = self.root.join("generated");
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let pages = self.page_ids()?;
        let mut out = Vec::new();
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            if !pages.contains(&entry.file_name().to_string_lossy().into_owned()) {
                out.push(entry.path());
            }
        }
        out.sort();
        Ok(out)
    }
}

pub fn pair_id(page: &str, strategy: PromptStrategy) -> String {
    format!("{page}/{strategy}")
}

pub fn parse_pair_id(pair: &str) -> Option<(&str, PromptStrategy)> {
    let (page, strategy) = pair.split_once('/')?;
    Some((page, strategy.parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids() {
        for ok in ["home", "p01", "a_b-c", "X"] {
            assert!(is_valid_id(ok), "{ok}");
        }
        for bad in ["", "-x", "../x", "a/b", "a b", ".hidden", &"x".repeat(65)] {
            assert!(!is_valid_id(bad), "{bad}");
        }
    }

    #[test]
    fn pair_ids_round_trip() {
        assert_eq!(parse_pair_id(&pair_id("home", PromptStrategy::SelfRefine)), Some(("home", PromptStrategy::SelfRefine)));
        assert_eq!(parse_pair_id("home"), None);
        assert_eq!(parse_pair_id("home/nope"), None);
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        atomic_write(&path, b"old").unwrap();
        atomic_write(&path, b"new contents").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"new contents");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
