"""Key files: Ed25519 private key in PEM, public credential as JSON."""

from __future__ import annotations

import json
import os
from pathlib import Path

from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from . import crypto
from .errors import FairdrawError, FormatError
from .wire import b64, unb64

PRIVATE_NAME = "key.pem"
PUBLIC_NAME = "key.pub.json"


def keygen(out_dir, force: bool = False) -> tuple[Path, Path, bytes]:
    """Write a fresh keypair; returns (private path, public path, fingerprint)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    priv_path = out / PRIVATE_NAME
    pub_path = out / PUBLIC_NAME
    if not force and (priv_path.exists() or pub_path.exists()):
        raise FairdrawError(f"{priv_path} exists; pass --force to overwrite")
    sk, pk = crypto.generate_keypair()
    pem = sk.private_bytes(
        serialization.Encoding.PEM,
        serialization.PrivateFormat.PKCS8,
        serialization.NoEncryption(),
    )
    fd = os.open(priv_path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "wb") as fh:
        fh.write(pem)
    fp = crypto.fingerprint(pk)
    pub_path.write_text(json.dumps({
        "scheme": crypto.SIGNATURE_SCHEME,
        "public_key": b64(pk),
        "fingerprint": fp.hex(),
    }, indent=2) + "\n")
    return priv_path, pub_path, fp


def load_private_key(path) -> tuple[Ed25519PrivateKey, bytes]:
    """(private key, raw public key) from a PEM file."""
    data = Path(path).read_bytes()
    sk = serialization.load_pem_private_key(data, password=None)
    if not isinstance(sk, Ed25519PrivateKey):
        raise FormatError(f"{path} is not an Ed25519 private key")
    return sk, sk.public_key().public_bytes_raw()


def load_public_credential(path) -> bytes:
    """Raw public key from a credential file; checks the stored fingerprint."""
    obj = json.loads(Path(path).read_text())
    if obj.get("scheme") != crypto.SIGNATURE_SCHEME:
        raise FormatError(f"unsupported scheme {obj.get('scheme')!r}")
    pk = unb64(obj["public_key"])
    stated = obj.get("fingerprint")
    if stated and stated != crypto.fingerprint(pk).hex():
        raise FormatError(f"fingerprint in {path} does not match the public key")
    return pk
