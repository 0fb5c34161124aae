"""
Hiérarchie d'erreurs de hsifc.

Chaque erreur porte l'étiquette du module qui l'a levée ; les commandes
l'affichent en préfixe et en déduisent le code de sortie.
"""


class HsifcError(ValueError):
    """Erreur de base, étiquetée par module"""
    module = 'hsifc'

    def __init__(self, message, module=None):
        super().__init__(message)
        if module:
            self.module = module

    def tagged(self):
        return f"[{self.module}] {self}"


class DataFormatError(HsifcError):
    """Fichier de données illisible ou incohérent"""
    module = 'hsi_data'


class UnsupportedFormatError(DataFormatError):
    """Variante ENVI valide mais non prise en charge (interleave, type)"""


class ShapeMismatchError(HsifcError):
    """Dimensions incompatibles entre deux objets"""
    module = 'hsi_data'


class SamplingError(HsifcError):
    module = 'sampling'


class NetworkError(HsifcError):
    module = 'nn_core'


class ModelFormatError(NetworkError):
    """Fichier modèle HSM1 corrompu, tronqué ou de version inconnue"""


class BandSelectionError(HsifcError):
    module = 'band_select'


class EvaluationError(HsifcError):
    module = 'evaluation'


class ExperimentError(HsifcError):
    """Échec d'une répétition d'expérience (l'index est conservé)"""
    module = 'evaluation'

    def __init__(self, message, repeat, cause=None):
        super().__init__(f"répétition {repeat}: {message}", module=getattr(cause, 'module', None))
        self.repeat = repeat
        self.cause = cause


class ConfigError(HsifcError):
    """Configuration ou usage invalide (code de sortie 2)"""
    module = 'cli'
