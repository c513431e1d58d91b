#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mrweb_core::resource::ResourceList;
use mrweb_stubs::{ChatStub, StubReply};

pub const API_KEY: &str = "test-key";

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn copy_dir(src: &Path, dst: &Path) {
    std::fs::create_dir_all(dst).unwrap();
    for entry in std::fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let to = dst.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &to);
        } else {
            std::fs::copy(entry.path(), to).unwrap();
        }
    }
}

/// A private copy of the bundled three-page workspace.
pub fn temp_workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&fixture("workspace"), dir.path());
    dir
}

pub fn set_endpoint(root: &Path, url: &str) {
    let path = root.join("mrweb.json");
    let mut config: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    config["endpoint"] = url.into();
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
}

/// A chat stub that answers with the original HTML of whichever workspace
/// page's resource list appears in the prompt, wrapped in a code fence.
pub fn page_stub(root: &Path) -> ChatStub {
    let mut pages = Vec::new();
    for entry in std::fs::read_dir(root.join("pages")).unwrap() {
        let dir = entry.unwrap().path();
        let list = ResourceList::from_json(&std::fs::read_to_string(dir.join("resources.json")).unwrap()).unwrap();
        let html = std::fs::read_to_string(dir.join("original.html")).unwrap();
        pages.push((list.entries_json(), html));
    }
    ChatStub::with(move |_, body| {
        let prompt = body["messages"][0]["content"][0]["text"].as_str().unwrap_or("");
        match pages.iter().find(|(list, _)| prompt.contains(list.as_str())) {
            Some((_, html)) => StubReply::chat(&format!("Here is the page.\n```html\n{html}```\n")),
            None => StubReply::chat("I do not recognise this page."),
        }
    })
}

pub fn mrweb(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrweb"))
        .arg("--workspace")
        .arg(root)
        .args(args)
        .env("MRWEB_API_KEY", API_KEY)
        .output()
        .unwrap()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}
