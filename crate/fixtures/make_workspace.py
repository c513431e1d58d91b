"""Regenerates fixtures/workspace and fixtures/iqa. Deterministic."""

import json
import shutil
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

ROOT = Path(__file__).resolve().parent
WS = ROOT / "workspace"
W, H = 320, 240

PAGES = {
    "home": {
        "origin": "https://portfolio.example/",
        "title": "Portfolio",
        "background": (246, 244, 238),
        "elements": [
            ("a", (10, 8, 60, 28), {"href": "/"}, "Home"),
            ("a", (70, 8, 140, 28), {"href": "/projects"}, "Projects"),
            ("a", (150, 8, 220, 28), {"href": "/contact"}, "Contact"),
            ("a", (240, 8, 310, 28), {"href": "https://github.com/example"}, "GitHub"),
            ("img", (20, 50, 140, 150), {"src": "/img/me.png"}, None),
            ("section", (160, 50, 300, 150), {"backgroundImage": "/img/banner.jpg"}, None),
            ("a", (20, 170, 120, 190), {"href": "/about"}, "Read more"),
            ("a", (200, 200, 260, 220), {"href": "/secret"}, "Secret", False),
        ],
    },
    "projects": {
        "origin": "https://portfolio.example/projects",
        "title": "Projects",
        "background": (232, 240, 250),
        "elements": [
            ("a", (10, 8, 60, 28), {"href": "/"}, "Home"),
            ("a", (70, 8, 140, 28), {"href": "/projects"}, "Projects"),
            ("a", (150, 8, 220, 28), {"href": "/contact"}, "Contact"),
            ("img", (10, 45, 100, 115), {"src": "/img/alpha.png"}, None),
            ("img", (115, 45, 205, 115), {"src": "/img/beta.png"}, None),
            ("img", (220, 45, 310, 115), {"src": "/img/gamma.png"}, None),
            ("a", (10, 120, 100, 136), {"href": "/projects/alpha"}, "Alpha"),
            ("a", (115, 120, 205, 136), {"href": "/projects/beta"}, "Beta"),
            ("a", (220, 120, 310, 136), {"href": "https://demo.example.org/gamma"}, "Gamma demo"),
            ("section", (0, 150, 320, 230), {"backgroundImage": "/img/stripes.png"}, None),
        ],
    },
    "contact": {
        "origin": "https://portfolio.example/contact",
        "title": "Contact",
        "background": (250, 236, 236),
        "elements": [
            ("a", (10, 8, 60, 28), {"href": "/"}, "Home"),
            ("a", (70, 8, 140, 28), {"href": "/projects"}, "Projects"),
            ("a", (150, 8, 220, 28), {"href": "/contact"}, "Contact"),
            ("img", (20, 50, 100, 130), {"src": "/img/map.png"}, None),
            ("a", (120, 180, 200, 205), {"href": "/api/contact"}, "Send"),
            ("a", (210, 180, 300, 205), {"href": "https://social.example.net/me"}, "Follow"),
        ],
    },
}

PALETTE = [(200, 60, 50), (40, 120, 200), (60, 160, 90), (230, 180, 40), (120, 70, 160), (30, 30, 30)]


def screenshot(spec, rng):
    bg = np.array(spec["background"], dtype=np.float64)
    y, x = np.mgrid[0:H, 0:W]
    shade = (x / W * 12.0 - y / H * 8.0)[..., None]
    img = np.clip(bg + shade + rng.normal(0, 3, (H, W, 3)), 0, 255).astype(np.uint8)
    pil = Image.fromarray(img, "RGB")
    draw = ImageDraw.Draw(pil)
    for i, el in enumerate(spec["elements"]):
        visible = el[4] if len(el) > 4 else True
        if not visible:
            continue
        x1, y1, x2, y2 = el[1]
        draw.rectangle([x1, y1, x2 - 1, y2 - 1], fill=PALETTE[i % len(PALETTE)])
    return pil


def dump(spec):
    elements = []
    for el in spec["elements"]:
        tag, (x1, y1, x2, y2), attrs, text = el[:4]
        visible = el[4] if len(el) > 4 else True
        e = {"tag": tag, "box": [[x1, y1], [x2, y2]], "visible": visible}
        e.update(attrs)
        if text is not None:
            e["text"] = text
        elements.append(e)
    return {"origin": spec["origin"], "viewport": {"width": W, "height": H}, "elements": elements}


def html(page, spec):
    body = []
    for el in spec["elements"]:
        tag, (x1, y1, x2, y2), attrs, text = el[:4]
        visible = el[4] if len(el) > 4 else True
        style = f"position:absolute;left:{x1}px;top:{y1}px;width:{x2 - x1}px;height:{y2 - y1}px"
        if not visible:
            style += ";display:none"
        if tag == "a":
            body.append(f'    <a href="{attrs["href"]}" style="{style}">{text}</a>')
        elif tag == "img":
            body.append(f'    <img src="{attrs["src"]}" alt="" style="{style}">')
        else:
            body.append(f'    <section style="{style};background-image:url({attrs["backgroundImage"]})"></section>')
    return (
        "<!DOCTYPE html>\n"
        f"<!-- page: {page} -->\n"
        "<html>\n  <head>\n    <meta charset=\"utf-8\">\n"
        f"    <title>{spec['title']}</title>\n  </head>\n"
        f"  <body style=\"margin:0;width:{W}px;height:{H}px\">\n" + "\n".join(body) + "\n  </body>\n</html>\n"
    )


def resources(spec):
    """Expected extraction: visible elements in dump order."""
    host = "portfolio.example"
    out = []
    for el in spec["elements"]:
        tag, (x1, y1, x2, y2), attrs, text = el[:4]
        visible = el[4] if len(el) > 4 else True
        if not visible:
            continue
        box = [[float(x1), float(y1)], [float(x2), float(y2)]]
        if tag == "a":
            href = attrs["href"]
            url = href if href.startswith("http") else "https://" + host + href
            if url.endswith("/") and url.count("/") > 3:
                url = url.rstrip("/")
            if not href.startswith("http"):
                kind = "backend-route" if href.startswith("/api") else "internal-link"
            else:
                kind = "external-link"
            out.append({"position": box, "type": kind, "url": url, "text": text})
        elif tag == "img":
            out.append({"position": box, "type": "image", "url": "https://" + host + attrs["src"]})
        else:
            out.append({"position": box, "type": "background-image", "url": "https://" + host + attrs["backgroundImage"]})
    return {"origin": spec["origin"], "width": float(W), "height": float(H), "entries": out}


def write_json(path, value):
    path.write_text(json.dumps(value, indent=2) + "\n")


def workspace():
    if WS.exists():
        shutil.rmtree(WS)
    rng = np.random.default_rng(7)
    for page, spec in PAGES.items():
        d = WS / "pages" / page
        d.mkdir(parents=True)
        (d / "original.html").write_text(html(page, spec))
        screenshot(spec, rng).save(d / "original.png")
        write_json(d / "geometry.json", dump(spec))
        write_json(d / "resources.json", resources(spec))
        write_json(d / "embedding.json", [round(float(v), 6) for v in rng.normal(0, 1, 16)])

        g = WS / "generated" / page / "zero-shot"
        g.mkdir(parents=True)
        shutil.copy(d / "original.html", g / "page.html")
        shutil.copy(d / "original.png", g / "page.png")
        shutil.copy(d / "geometry.json", g / "geometry.json")
        shutil.copy(d / "resources.json", g / "resources.json")
        shutil.copy(d / "embedding.json", g / "embedding.json")
        write_json(
            g / "transcript.json",
            {
                "strategy": "zero-shot",
                "model": "fixture-copy",
                "temperature": 0.0,
                "seed": 42,
                "max_tokens": 4096,
                "refine_rounds": 0,
                "seed_accepted": None,
                "turns": [],
                "renders": [],
            },
        )

    (WS / "ratings").mkdir()
    write_json(WS / "ratings" / "ratings.json", [])
    (WS / "bin").mkdir()
    (WS / "bin" / "render-stub.sh").write_text(
        "#!/bin/sh\n"
        "# Stand-in renderer: copies the reference artifacts of the page named\n"
        "# in the HTML's page marker comment. Runs from the workspace root.\n"
        "set -e\n"
        'page=$(sed -n \'s/.*<!-- page: \\([A-Za-z0-9_-]*\\) -->.*/\\1/p\' "$1" | head -n 1)\n'
        'if [ -z "$page" ]; then echo "no page marker in $1" >&2; exit 1; fi\n'
        'cp "pages/$page/original.png" "$2"\n'
        'cp "pages/$page/geometry.json" "$3"\n'
    )
    write_json(
        WS / "mrweb.json",
        {
            "seed": 42,
            "route_prefixes": ["/api"],
            "renderer_command": "sh bin/render-stub.sh {html} {png} {geometry}",
            "endpoint": "http://127.0.0.1:9/v1/chat/completions",
            "model": "stub-model",
            "credential_env": "MRWEB_API_KEY",
            "temperature": 0.0,
            "max_tokens": 4096,
            "refine_rounds": 1,
            "max_in_flight": 2,
        },
    )


def iqa():
    d = ROOT / "iqa"
    d.mkdir(exist_ok=True)
    rng = np.random.default_rng(11)
    pairs = [f"p{i:02d}/zero-shot" for i in range(40)]
    quality = rng.uniform(0, 1, len(pairs))
    mae = {p: round(float(60 * (1 - q) + rng.normal(0, 6)), 4) for p, q in zip(pairs, quality)}
    nemd = {p: round(float(0.5 + 0.45 * q + rng.normal(0, 0.08)), 4) for p, q in zip(pairs, quality)}
    ssim = {p: round(float(0.3 + 0.6 * q + rng.normal(0, 0.15)), 4) for p, q in zip(pairs, quality)}
    ratings = []
    for r in range(8):
        bias = rng.normal(0, 0.4)
        for p, q in zip(pairs, quality):
            score = int(np.clip(np.rint(1 + 4 * q + bias + rng.normal(0, 0.7)), 1, 5))
            ratings.append({"rater": f"r{r}", "pair": p, "score": score})
    write_json(d / "ratings.json", ratings)
    write_json(d / "mae.json", mae)
    write_json(d / "nemd.json", nemd)
    write_json(d / "ssim.json", ssim)


if __name__ == "__main__":
    workspace()
    iqa()
