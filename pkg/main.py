import sys

# Importar configuraciones
from config.settings import Settings
from utils.logger import LoggerSetup, app_logger

# Importar controlador de la línea de comandos
from controllers.cliController import CliController, EXIT_ERROR


class OphcApp:
    """Clase principal de la aplicación"""

    def __init__(self):
        """Inicializa la aplicación"""
        self.cli_controller = None

    def setup(self):
        """Configura la aplicación antes de iniciar"""
        try:
            LoggerSetup.setup()
            app_logger.debug(f"Iniciando {Settings.APP_NAME} v{Settings.APP_VERSION} ({Settings.ENVIRONMENT})")

            # Verificar que los directorios de salida existan
            Settings.ensure_directories()

            self.cli_controller = CliController()
            return True

        except Exception as e:
            error_msg = f"Error crítico al inicializar la aplicación: {str(e)}"
            app_logger.critical(error_msg)
            print(f"ERROR CRÍTICO: {error_msg}", file=sys.stderr)
            return False

    def run(self, argv=None):
        """
        Ejecuta un sub-comando

        Args:
            argv (list): Argumentos de la línea de comandos

        Returns:
            int: Código de salida
        """
        if not self.setup():
            return EXIT_ERROR

        exit_code = self.cli_controller.dispatch(argv)
        app_logger.debug(f"Comando terminado con código: {exit_code}")
        return exit_code


def main():
    """Función principal"""
    app = OphcApp()
    sys.exit(app.run(sys.argv[1:]))


if __name__ == "__main__":
    main()
