"""
Base commune des commandes hsifc : flags partagés, construction de la
RunConfig et traduction des erreurs en codes de sortie.

Codes de sortie : 0 succès, 1 échec du pipeline, 2 erreur d'usage / de configuration.
"""

import logging

from django.core.management.base import BaseCommand, CommandError

from hsifc.band_select import read_band_list
from hsifc.exceptions import ConfigError, HsifcError
from hsifc.serializers import load_run_config

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
PIPELINE_ERROR = 1

# dest argparse -> clé de RunConfig
RUN_OPTIONS = (
    'dataset', 'cube', 'gt', 'csv', 'data_dir', 'seed', 'out', 'balance_order',
    'i_understand_leakage', 'balance', 'epochs', 'batch_size', 'learning_rate',
    'hidden_sizes', 'test_fraction',
)


def parse_hidden_sizes(value):
    if value is None:
        return None
    try:
        sizes = [int(size) for size in str(value).split(',') if size.strip()]
    except ValueError as e:
        raise ConfigError(f"--hidden-sizes attend des entiers séparés par des virgules, reçu '{value}'") from e
    if not sizes:
        raise ConfigError("--hidden-sizes est vide")
    return sizes


class HsifcCommand(BaseCommand):
    """Les sous-classes implémentent run(**options)"""

    def add_source_arguments(self, parser):
        parser.add_argument('--config', help="Fichier de configuration JSON")
        parser.add_argument('--dataset', help="Jeu enregistré (indian_pines, salinas, ...)")
        parser.add_argument('--cube', help="En-tête ENVI du cube (.hdr)")
        parser.add_argument('--gt', help="En-tête ENVI de la vérité terrain (.hdr)")
        parser.add_argument('--csv', help="Jeu label,v1,...,vB")
        parser.add_argument('--data-dir', dest='data_dir', help="Racine des jeux (défaut : HSIFC_DATA_DIR)")

    def add_run_arguments(self, parser):
        self.add_source_arguments(parser)
        parser.add_argument('--seed', type=int)
        parser.add_argument('--out', help="Dossier de sortie (défaut : HSIFC_OUTPUT_DIR/<commande>)")
        parser.add_argument('--balance-order', dest='balance_order', choices=['post_split', 'pre_split_unsafe'])
        parser.add_argument('--i-understand-leakage', dest='i_understand_leakage', action='store_true', default=None)
        parser.add_argument('--no-balance', dest='balance', action='store_false', default=None)
        parser.add_argument('--epochs', type=int)
        parser.add_argument('--batch-size', dest='batch_size', type=int)
        parser.add_argument('--learning-rate', dest='learning_rate', type=float)
        parser.add_argument('--hidden-sizes', dest='hidden_sizes', help="ex. 250,300,400,300")
        parser.add_argument('--test-fraction', dest='test_fraction', type=float)
        parser.add_argument('--bands', dest='bands_file', help="Liste de bandes (un indice par ligne)")

    def run_config(self, options, **extra):
        overrides = {key: options.get(key) for key in RUN_OPTIONS}
        overrides['hidden_sizes'] = parse_hidden_sizes(overrides['hidden_sizes'])
        if options.get('bands_file'):
            overrides['bands'] = read_band_list(options['bands_file'])
        overrides.update(extra)
        return load_run_config(options.get('config'), overrides)

    def success(self, message):
        self.stdout.write(self.style.SUCCESS(f"✅ {message}"))

    def warning(self, message):
        self.stdout.write(self.style.WARNING(f"⚠️  {message}"))

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except ConfigError as e:
            raise CommandError(f"❌ {e.tagged()}", returncode=USAGE_ERROR) from e
        except FileNotFoundError as e:
            raise CommandError(f"❌ [cli] {e}", returncode=USAGE_ERROR) from e
        except HsifcError as e:
            raise CommandError(f"❌ {e.tagged()}", returncode=PIPELINE_ERROR) from e

    def run(self, **options):
        raise NotImplementedError
