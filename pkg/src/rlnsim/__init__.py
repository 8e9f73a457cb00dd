"""Economic spam protection for p2p gossip: rate-limiting nullifiers,
off-chain membership trees, commit-reveal slashing, and a deterministic
network simulator, exposed as a library, an HTTP service, and a CLI.
"""

from .core import (
    DuplicateShareError,
    EpochConfig,
    Identity,
    Share,
    compute_internal_nullifier,
    compute_share,
    compute_thr,
    current_epoch,
    keygen,
    message_hash,
    recover_secret,
    share_coefficient,
)
from .field import (
    DOMAIN_COEFF,
    DOMAIN_COMMITMENT,
    DOMAIN_MSG,
    DOMAIN_NULLIFIER,
    DOMAIN_SLASH_COMMIT,
    P,
    hash_to_field,
)
from .merkle import AuthPath, MerkleTree, NIL_LEAF, RegistryEvent, verify_path
from .proofs import (
    ConstraintViolatedError,
    PrivateInputs,
    Proof,
    ProofSystem,
    PublicInputs,
    forge,
)
from .registry import DepositPolicy, Registry, slash_commitment
from .relay import (
    Decision,
    MessageBundle,
    PeerState,
    RoutingDecision,
    craft_bundle,
)

__version__ = "0.1.0"
