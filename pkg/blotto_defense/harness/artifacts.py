"""
Warm-start artifacts: hotbooted PHC tables and DQN parameters on disk

Both formats carry a version and the config hash of the game they were
trained for; loading against another configuration fails.
"""

import logging
import struct
from pathlib import Path
from typing import Dict, Hashable, List, Tuple, Union

import numpy as np

from .. import config
from ..agents.dqn import HOTBOOT_DQN, DqnConfig
from ..agents.network import LAYER_NAMES, NetworkParams
from ..agents.tabular import HOTBOOT_PHC, PolicyTable, QTable
from ..errors import ArtifactMismatchError
from ..game.core import GameConfig, config_hash

logger = logging.getLogger(__name__)

TABLE_MAGIC = '# blotto-phc-tables'
NETWORK_MAGIC = b'BLOTTODQN'
TABLE_NAMES = ('q', 'pi')


def table_hash(game: GameConfig) -> str:
    return config_hash(game, HOTBOOT_PHC)


def network_hash(game: GameConfig, cfg: DqnConfig) -> str:
    return config_hash(game, HOTBOOT_DQN, window=cfg.window, side=cfg.side(game.devices),
                       conv1=cfg.conv1_filters, conv2=cfg.conv2_filters, hidden=cfg.hidden_units,
                       relu_output=cfg.relu_output)


def _encode_key(key: Hashable) -> str:
    prev, ticks = key
    return f"{' '.join(str(n) for n in prev)}|{' '.join(str(t) for t in ticks)}"


def _decode_key(text: str) -> Hashable:
    prev, _, ticks = text.partition('|')
    return tuple(int(v) for v in prev.split()), tuple(int(v) for v in ticks.split())


def _check_header(found: str, expected: str, path: Path) -> None:
    if found != expected:
        raise ArtifactMismatchError(
            f"config hash mismatch: {path} was written for {found[:12]}..., "
            f"this configuration is {expected[:12]}..."
        )


def save_tables(path: Union[str, Path], game: GameConfig, tables: Tuple[QTable, PolicyTable]) -> Path:
    """
    Write Q and policy tables as text rows `table,state,action,value`

    Values use 17 significant digits so a reload is exact.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    q, pi = tables
    lines = [
        TABLE_MAGIC,
        f"# version={config.TABLE_ARTIFACT_VERSION}",
        f"# config_hash={table_hash(game)}",
        f"# actions={q.action_count}",
    ]
    for name, table in zip(TABLE_NAMES, (q, pi)):
        for key in sorted(table.rows):
            encoded = _encode_key(key)
            lines.extend(f"{name},{encoded},{a},{v:.17g}" for a, v in enumerate(table.rows[key]))
    path.write_text('\n'.join(lines) + '\n')
    logger.info(f"Saved hotbooted tables ({len(q)} Q states, {len(pi)} policy states) to {path}")
    return path


def load_tables(path: Union[str, Path], game: GameConfig) -> Tuple[QTable, PolicyTable]:
    path = Path(path)
    header: Dict[str, str] = {}
    rows: Dict[str, Dict[Hashable, List[Tuple[int, float]]]] = {name: {} for name in TABLE_NAMES}
    with path.open() as f:
        first = f.readline().strip()
        if first != TABLE_MAGIC:
            raise ArtifactMismatchError(f"{path} is not a table artifact")
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith('#'):
                key, _, value = line[1:].strip().partition('=')
                header[key] = value
                continue
            name, state, action, value = line.split(',')
            rows[name].setdefault(_decode_key(state), []).append((int(action), float(value)))

    if int(header.get('version', -1)) != config.TABLE_ARTIFACT_VERSION:
        raise ArtifactMismatchError(f"{path} has table format version {header.get('version')}")
    _check_header(header.get('config_hash', ''), table_hash(game), path)

    actions = int(header['actions'])
    q, pi = QTable(actions), PolicyTable(actions)
    for name, table in zip(TABLE_NAMES, (q, pi)):
        for key, entries in rows[name].items():
            values = np.zeros(actions)
            for a, v in entries:
                values[a] = v
            table.rows[key] = values
    logger.info(f"Loaded hotbooted tables from {path}")
    return q, pi


def save_network(path: Union[str, Path], game: GameConfig, cfg: DqnConfig, params: NetworkParams) -> Path:
    """
    Write network parameters in binary form

    Layout: magic, version, 64-char config hash, input side, output flag,
    then per layer its rank, dims and little-endian float64 data.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('wb') as f:
        f.write(NETWORK_MAGIC)
        f.write(struct.pack('<I', config.NETWORK_ARTIFACT_VERSION))
        f.write(network_hash(game, cfg).encode('ascii'))
        f.write(struct.pack('<IB', params.input_side, int(params.relu_output)))
        for _, array in params.arrays():
            f.write(struct.pack('<I', array.ndim))
            f.write(struct.pack(f'<{array.ndim}I', *array.shape))
            f.write(np.ascontiguousarray(array, dtype='<f8').tobytes())
    logger.info(f"Saved hotbooted network ({params.parameter_count} parameters) to {path}")
    return path


def load_network(path: Union[str, Path], game: GameConfig, cfg: DqnConfig) -> NetworkParams:
    path = Path(path)
    data = path.read_bytes()
    if not data.startswith(NETWORK_MAGIC):
        raise ArtifactMismatchError(f"{path} is not a network artifact")
    offset = len(NETWORK_MAGIC)
    (version,) = struct.unpack_from('<I', data, offset)
    offset += 4
    if version != config.NETWORK_ARTIFACT_VERSION:
        raise ArtifactMismatchError(f"{path} has network format version {version}")
    found = data[offset:offset + 64].decode('ascii')
    offset += 64
    _check_header(found, network_hash(game, cfg), path)

    side, relu_output = struct.unpack_from('<IB', data, offset)
    offset += struct.calcsize('<IB')
    arrays = {}
    for name in LAYER_NAMES:
        (ndim,) = struct.unpack_from('<I', data, offset)
        offset += 4
        shape = struct.unpack_from(f'<{ndim}I', data, offset)
        offset += 4 * ndim
        count = int(np.prod(shape))
        arrays[name] = np.frombuffer(data, dtype='<f8', count=count, offset=offset).reshape(shape).astype(float)
        offset += 8 * count
    logger.info(f"Loaded hotbooted network from {path}")
    return NetworkParams(**arrays, input_side=side, relu_output=bool(relu_output))


def save_artifact(path: Union[str, Path], game: GameConfig, cfg: DqnConfig, warm) -> Path:
    if isinstance(warm, NetworkParams):
        return save_network(path, game, cfg, warm)
    return save_tables(path, game, warm)


def load_artifact(path: Union[str, Path], defender: str, game: GameConfig, cfg: DqnConfig):
    """Load the warm start matching a defender kind"""
    if defender == HOTBOOT_DQN:
        return load_network(path, game, cfg)
    return load_tables(path, game)
