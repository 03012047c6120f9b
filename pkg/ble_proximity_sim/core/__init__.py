# Shared types, errors, configuration and coordination
