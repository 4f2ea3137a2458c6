"""Commitment scheme and signature boundary.

Commitment digests are SHA-256 over a domain tag, the canonical spec bytes,
a 32-byte mask (or the previous digest in a chain) and the share as an
8-byte big-endian integer:

    COMMITv1 | DRAWv1(spec) | mask (32) | share (u64)     single draw
    CHAINv1  | DRAWv1(spec) | prev (32) | share (u64)     chain step
             (step 0 uses the real mask as ``prev``)

Signed payloads are prefixed with the ``MSGv1`` tag; the three tags keep
the hash input spaces disjoint.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import struct

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .errors import CryptoError, SpecError
from .model import DrawList, DrawSpec, canonical_encode

MASK_LEN = 32
DIGEST_LEN = 32
SHARE_WIDTH = 8
MAX_SHARE = 2**64 - 1

TAG_COMMIT = b"COMMITv1"
TAG_CHAIN = b"CHAINv1"
TAG_MESSAGE = b"MSGv1"

HASH_SCHEME = "SHA-256"
SIGNATURE_SCHEME = "Ed25519"
PUBLIC_KEY_LEN = 32


def gen_mask() -> bytes:
    """32 bytes from the OS cryptographic generator."""
    return secrets.token_bytes(MASK_LEN)


def gen_share(index_space: int) -> int:
    """Uniform share in [0, index_space) without modulo bias."""
    if index_space < 1:
        raise SpecError("index space must be positive")
    return secrets.randbelow(index_space)


def _share_bytes(share: int) -> bytes:
    if not 0 <= share <= MAX_SHARE:
        raise SpecError(f"share {share} does not fit in {SHARE_WIDTH} bytes")
    return struct.pack(">Q", share)


def commit_digest(tag: bytes, spec_bytes: bytes, mask: bytes, share: int) -> bytes:
    """Raw digest primitive; no range check against the index space."""
    if len(mask) != MASK_LEN:
        raise SpecError(f"mask must be {MASK_LEN} bytes, got {len(mask)}")
    return hashlib.sha256(tag + spec_bytes + mask + _share_bytes(share)).digest()


def commit(spec: DrawSpec, mask: bytes, share: int) -> bytes:
    """Commitment digest for a single draw; share must lie in the index space."""
    if not 0 <= share < spec.eligible.index_space:
        raise SpecError(
            f"share {share} outside index space [0, {spec.eligible.index_space})"
        )
    return commit_digest(TAG_COMMIT, canonical_encode(spec), mask, share)


def open_commitment(digest: bytes, spec: DrawSpec, mask: bytes, share: int) -> bool:
    """True iff (spec, mask, share) opens ``digest``. Constant-time comparison."""
    try:
        recomputed = commit_digest(TAG_COMMIT, canonical_encode(spec), mask, share)
    except SpecError:
        return False
    return hmac.compare_digest(recomputed, digest)


def chain_commit(draws: DrawList, mask: bytes, shares: list[int]) -> bytes:
    """Final digest of the iterated chain C_i = H(Draw_i, C_{i-1}, share_i)."""
    if len(shares) != len(draws.draws):
        raise SpecError(
            f"chain needs {len(draws.draws)} shares, got {len(shares)}"
        )
    link = mask
    for spec, share in zip(draws.draws, shares):
        link = commit_digest(TAG_CHAIN, canonical_encode(spec), link, share)
    return link


def verify_chain(digest: bytes, draws: DrawList, mask: bytes, shares: list[int]) -> bool:
    """True iff the full opening reproduces the signed final digest."""
    try:
        recomputed = chain_commit(draws, mask, shares)
    except SpecError:
        return False
    return hmac.compare_digest(recomputed, digest)


def generate_keypair() -> tuple[Ed25519PrivateKey, bytes]:
    """(private key, raw 32-byte public key)."""
    sk = Ed25519PrivateKey.generate()
    return sk, sk.public_key().public_bytes_raw()


def fingerprint(public_key: bytes) -> bytes:
    """SHA-256 of the raw public key; the stakeholder identifier."""
    return hashlib.sha256(public_key).digest()


def sign_message(sk: Ed25519PrivateKey, payload: bytes) -> bytes:
    return sk.sign(payload)


def verify_message(public_key: bytes, payload: bytes, signature: bytes) -> bool:
    """Strict verification.  Malformed encodings raise, they are not 'false'."""
    if len(public_key) != PUBLIC_KEY_LEN:
        raise CryptoError(f"public key must be {PUBLIC_KEY_LEN} bytes, got {len(public_key)}")
    if len(signature) != 64:
        raise CryptoError(f"Ed25519 signature must be 64 bytes, got {len(signature)}")
    try:
        pk = Ed25519PublicKey.from_public_bytes(public_key)
    except ValueError as exc:
        raise CryptoError(f"unloadable public key: {exc}") from exc
    try:
        pk.verify(signature, payload)
        return True
    except InvalidSignature:
        return False
